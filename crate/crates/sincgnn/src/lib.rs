//! Graph networks on grid graphs whose weights are constructed directly from
//! lattice samples of a bandlimited function.
//!
//! The pipeline: [`signal`] supplies exact test functions and their samples,
//! [`kernel`] the Gaussian-regularized sinc kernel, [`cardinal`] the
//! continuous reconstruction operators, [`quadrature`] the Newton–Cotes
//! discretization, [`network`] the constructed network and [`analysis`] the
//! checks of the supporting inequalities.
//!
//! ```
//! use sincgnn::network::{build_gnn, eval_gnn};
//! use sincgnn::signal::{eval_signal, random_signal};
//! use sincgnn::KernelParams;
//!
//! let params = KernelParams::with_defaults(16, 0.05).unwrap();
//! let f = random_signal(std::f64::consts::FRAC_PI_2, 1, 5, 0);
//! let net = build_gnn(&f, &params).unwrap();
//! // prediction nodes sit on the grid of step τ = 1/L_s
//! let x = [0.5];
//! assert!((eval_gnn(&net, &x).unwrap() - eval_signal(&f, &x)).abs() < 1e-2);
//! ```

pub mod analysis;
pub mod cardinal;
pub mod error;
pub mod kernel;
pub mod network;
pub mod numeric;
pub mod quadrature;
pub mod signal;

pub use cardinal::{ErrorReport, GridSpec};
pub use error::{Error, Result};
pub use kernel::KernelParams;
pub use network::{GnnSpec, NormSource};
pub use quadrature::{QuadMode, QuadratureOracle};
pub use signal::{LatticeSamples, SignalSpec, Term};
