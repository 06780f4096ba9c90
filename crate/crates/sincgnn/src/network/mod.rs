//! The constructed graph network and its ReLU building blocks.

mod gnn;
mod graph;
mod mult;

pub use gnn::{
    build_gnn, build_gnn_from_samples, build_gnn_with, default_mult_depth, eval_gnn, eval_gnn_hp, param_count,
    sample_norm, t1_bound, t2_bound, BuildOptions, GnnSpec, NormSource, QuadTables, SampleWeight, FILTER_BOUND,
};
pub use graph::{as_graph_filter, GraphFilter, Neighbor, Tap};
pub use mult::{
    chain_error_bound, hat_w, mult_approx, mult_chain, mult_exact, mult_layer_count, mult_weight_count, smoothed_hat,
    square_approx, square_weight_count,
};
