//! Surrogate-assisted, data-driven differential evolution for processes that
//! are only known through their sensor history.
//!
//! The numeric core (trees, boosting, mixtures, the optimizer) is generic over
//! [`Scalar`]; the aliases below fix it to `f64`, which is what the signal
//! pipeline, the synthetic plant and the command-line harness use.

pub mod de;
pub mod error;
pub mod harness;
pub mod init;
pub mod scalar;
pub mod signal;
pub mod surrogate;
pub mod synth;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default working precision.
pub type Real = f64;

pub type ConstraintModelF64 = surrogate::ConstraintModel<f64>;
pub type ObjectiveModelF64 = surrogate::ObjectiveModel<f64>;
pub type SurrogatesF64 = surrogate::Surrogates<f64>;
pub type GaussianMixtureF64 = init::GaussianMixture<f64>;
pub type PopulationF64 = init::Population<f64>;
pub type SearchSpaceF64 = de::SearchSpace<f64>;
pub type RunHistoryF64 = de::RunHistory<f64>;
