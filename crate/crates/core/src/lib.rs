//! Non-equilibrium steady states of open inhomogeneous XX spin chains coupled
//! to two bosonic heat baths.
//!
//! The numerical core ([`chain`], [`spectral`], [`currents`], [`fock`]) is
//! generic over [`Scalar`] (`f32` or `f64`); the aliases below fix `f64`.
//! [`experiments`] and [`io`] are `f64` drivers on top of it.

// `!(x > 0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chain;
pub mod currents;
pub mod error;
pub mod experiments;
pub mod fock;
pub mod io;
pub mod linalg;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod tolerances;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use tolerances::Tolerances;

pub type Chain = chain::ChainSpec<f64>;
pub type Perturbation = chain::PerturbationSpec<f64>;
pub type Spectrum = spectral::SpectralData<f64>;
pub type Bath = currents::BathConfig<f64>;
pub type Coefficients = currents::NessCoefficients<f64>;
pub type Report = currents::CurrentReport<f64>;
pub type FockOperators = fock::FockOperatorSet<f64>;
pub type Config = io::RunConfig;
