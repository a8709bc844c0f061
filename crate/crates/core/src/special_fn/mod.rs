//! Gamma-family functions, Bessel K and the Meijer-G engine.

mod bessel;
mod bivariate;
mod gamma;
mod meijer;

pub use bessel::bessel_k;
pub use bivariate::{bivariate_meijer_g, BivariateGSpec};
pub use gamma::{binomial, cos_pi, ln_gamma_complex, log_gamma, sin_pi};
pub use meijer::{meijer_g, Estimate, MeijerGSpec};
