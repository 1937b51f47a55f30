//! Covariance decay of stochastic processes through parameterized copulas.
//!
//! The crate computes Hoeffding covariances and their first/second order
//! decay constants for bivariate copula families, simulates series whose
//! pairwise copulas follow a lag schedule, and estimates process parameters
//! from the decay of per-lag Gaussian-copula fits.
//!
//! The numerical core (`numerics`, `marginals`, `copulas`, `decay`) is generic
//! over a [`Scalar`] (`f32` or `f64`). Simulation, estimation and the
//! experiment harness work in `f64`.

pub mod copulas;
pub mod decay;
pub mod error;
pub mod estimate;
pub mod harness;
pub mod marginals;
pub mod numerics;
pub mod output;
pub mod scalar;
pub mod simulate;

pub use copulas::{CopulaSpec, Family};
pub use decay::{DecayConstants, DecaySchedule};
pub use error::{Error, Result};
pub use marginals::Marginal;
pub use numerics::quadrature::QuadratureGrid;
pub use scalar::Scalar;

/// Double-precision copula family and parameters.
pub type CopulaSpec64 = CopulaSpec<f64>;
/// Single-precision copula family and parameters.
pub type CopulaSpec32 = CopulaSpec<f32>;
pub type Marginal64 = Marginal<f64>;
pub type Marginal32 = Marginal<f32>;
pub type DecaySchedule64 = DecaySchedule<f64>;
pub type DecayConstants64 = DecayConstants<f64>;
pub type QuadratureGrid64 = QuadratureGrid<f64>;
pub type QuadratureGrid32 = QuadratureGrid<f32>;
