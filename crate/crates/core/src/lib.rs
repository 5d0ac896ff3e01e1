//! Quasi-likelihood estimation of the number of modulated sinusoids observed
//! in additive white Gaussian noise, for the case where the component
//! parameters are known only up to measurement errors.
//!
//! The crate has four layers:
//!
//! - [`signal_model`] — the deterministic multi-tone model, reproducible
//!   noisy observations, and parameter-error application;
//! - [`likelihood`] — cross-correlation coefficients, the substituted
//!   log-likelihood profile, and the order estimate itself;
//! - [`theory`] — the decision statistics `(R, Q, rho)`, the exact and
//!   approximate abridged error probability, and the worst-case search over a
//!   parameter-error box;
//! - [`montecarlo`] — the trial harness that measures the empirical error
//!   probability and reproduces bit-for-bit under any parallelism.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the sign.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod likelihood;
pub mod montecarlo;
pub mod signal_model;
pub mod theory;

mod accum;
mod error;

pub use error::{Error, Result};
pub use likelihood::{CorrelationDecomposition, LikelihoodProfile, ProfileEvaluator};
pub use montecarlo::{McEstimate, SnrConvention, TrialConfig};
pub use signal_model::{
    ComponentParams, Envelope, ErrorSetting, Observation, ParamErrors, SignalSpec,
};
pub use theory::{
    AbridgedResult, DecisionStats, ErrorBox, NoiseProjection, ParamErrorBounds, SearchOptions,
    WorstCase,
};
