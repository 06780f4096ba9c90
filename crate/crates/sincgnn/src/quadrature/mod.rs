//! Newton–Cotes weights, the discrete ramp convolution 𝔊 and reference integrators.

mod filter;
mod newton_cotes;
mod oracle;
mod precise;

pub use filter::{
    discrete_conv_g, discrete_conv_g_with, filter_table, grid_index, max_steps, panel_steps, FilterTable, QuadMode,
};
pub use newton_cotes::{
    exact_weights, factorial_poly_integral, nc_weights, u_choice, weights_csv, NewtonCotesRule, EXACT_ORDER_CAP,
    FLOAT_ORDER_CAP,
};
pub use oracle::{conv_at, oracle_conv, Estimate, QuadratureOracle};
pub use precise::{conv_table, gauss_legendre, ConvTable};
