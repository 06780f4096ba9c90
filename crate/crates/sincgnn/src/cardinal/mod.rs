//! Continuous reconstruction operators and error measurement.

mod grid;
mod series;

pub use grid::{measure_error, ErrorReport, GridSpec, PointError};
pub(crate) use series::tensor_sum;
pub use series::{
    psi_proxy, psi_proxy_grid, psi_proxy_hp, psi_proxy_samples, r_series, r_series_support, r_tilde, r_tilde_samples,
    shannon_truncated,
};
