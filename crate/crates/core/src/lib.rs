//! Performance model of a dual-hop multiuser hybrid FSO/RF link: special
//! functions, channel laws, closed-form outage and DPSK error rates, and a Monte
//! Carlo simulator that checks them.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix it to one width. The simulator is `f64` only.

pub mod analytic;
pub mod channels;
pub mod error;
pub mod quadrature;
pub mod real;
pub mod simulator;
pub mod special_fn;
pub mod sum;
pub mod units;

pub use analytic::Scheme;
pub use error::{Error, Result};
pub use real::Real;

pub type SystemConfig = analytic::SystemConfig<f64>;
pub type TurbulenceParams = channels::TurbulenceParams<f64>;
pub type RfParams = channels::RfParams<f64>;
pub type MeijerGSpec = special_fn::MeijerGSpec<f64>;
pub type BivariateGSpec = special_fn::BivariateGSpec<f64>;

pub type SystemConfigF32 = analytic::SystemConfig<f32>;
pub type TurbulenceParamsF32 = channels::TurbulenceParams<f32>;
pub type RfParamsF32 = channels::RfParams<f32>;
pub type MeijerGSpecF32 = special_fn::MeijerGSpec<f32>;
pub type BivariateGSpecF32 = special_fn::BivariateGSpec<f32>;
