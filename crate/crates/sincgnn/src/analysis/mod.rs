//! Numerical checks of the inequalities the error analysis rests on.

mod bounds;
mod report;
mod spectral;
mod tables;

pub use bounds::{ibp_identity, prop4_bracket, proxy_residual, BracketReport, BRACKET_REFINE, BRACKET_WINDOW};
pub use report::{
    bracket_check, ghat_check, ibp_check, mills_check, nu_checks, run_suite, Check, Suite, VerificationReport,
};
pub use spectral::{
    gauss_tail, ghat, ghat_nonneg, mills_bounds, nu_alpha, nu_tr, nu_tr_parts, GhatReport, NuParts, NuProfile,
};
pub use tables::{factorial_poly_table, nc_exactness_defect, FactorialPolyRow};
