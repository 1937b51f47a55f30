//! Special functions, quadrature, differentiation and scalar minimization.

pub mod bvn;
pub mod diff;
pub mod normal;
pub mod optimize;
pub mod quadrature;
pub mod special;

pub use bvn::bvn_cdf;
pub use diff::{central_diff, central_diff_in, richardson_diff, Side, Stencil};
pub use normal::{std_normal, std_normal_cdf, std_normal_pdf, std_normal_quantile, NormalFn};
pub use optimize::{minimize_scalar, BracketSearch, Minimum};
pub use quadrature::{integrate2d, QuadratureGrid};
pub use special::{gamma_fn, ln_gamma, recip_gamma, riemann_zeta};
