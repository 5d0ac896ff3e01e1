//! Experiment front end for the `sinorder` estimator: configuration files,
//! the built-in reference scenario, theory/simulation sweeps, worst-case
//! reports, and their CSV renderings.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod doppler;
pub mod error;
pub mod preset;
pub mod sweep;

pub use config::ExperimentConfig;
pub use error::{Error, Result};
pub use preset::reference_preset;
