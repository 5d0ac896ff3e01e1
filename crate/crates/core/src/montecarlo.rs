//! Empirical error probability of the quasi-likelihood order estimate.
//!
//! Trials are independent: each draws a fresh noise realization from a
//! deterministic per-trial stream, runs the estimator with one fixed
//! error-contaminated parameter set, and tallies the estimated order.
//! Trial seeds derive from `(base_seed, snr bits, trial index)` through
//! [`noise::derive_seed`], so results are bit-identical across runs and
//! across any degree of parallelism.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::likelihood::ProfileEvaluator;
use crate::signal_model::{apply_errors, noise, synthesize, ErrorSetting, SignalSpec};

/// How the scalar SNR `z` maps to the noise scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrConvention {
    /// `z = a0^2 / (2 sigma)`: sigma enters linearly.
    #[default]
    SigmaLinear,
    /// `z = a0^2 / (2 sigma^2)`: the conventional power ratio.
    SigmaSquared,
}

/// Invert `z dB = 10 log10(a0^2 / (2 sigma))` for the noise scale.
pub fn snr_to_sigma(snr_db: f64, a0: f64) -> f64 {
    a0 * a0 / (2.0 * 10f64.powf(snr_db / 10.0))
}

/// Noise scale for an SNR in dB under the chosen convention.
pub fn sigma_for_snr(snr_db: f64, a0: f64, convention: SnrConvention) -> f64 {
    match convention {
        SnrConvention::SigmaLinear => snr_to_sigma(snr_db, a0),
        SnrConvention::SigmaSquared => {
            (a0 * a0 / (2.0 * 10f64.powf(snr_db / 10.0))).sqrt()
        }
    }
}

/// One Monte Carlo run: the scenario, the fixed measurement errors, the SNR,
/// and the trial budget.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub spec: SignalSpec,
    pub errors: ErrorSetting,
    pub snr_db: f64,
    pub n_trials: u64,
    pub base_seed: u64,
    pub snr_convention: SnrConvention,
}

/// Empirical error probability with its binomial standard error and the
/// histogram of estimated orders (`histogram[nu - 1]` counts `nu_hat == nu`).
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub p_err: f64,
    pub std_err: f64,
    pub n_trials: u64,
    pub histogram: Vec<u64>,
}

impl McEstimate {
    fn from_histogram(histogram: Vec<u64>, nu_true: usize, n_trials: u64) -> Self {
        let errors: u64 = histogram
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx + 1 != nu_true)
            .map(|(_, &c)| c)
            .sum();
        let p_err = errors as f64 / n_trials as f64;
        let std_err = (p_err * (1.0 - p_err) / n_trials as f64).sqrt();
        Self {
            p_err,
            std_err,
            n_trials,
            histogram,
        }
    }
}

/// Run `n_trials` independent trials at one SNR.
///
/// The measured parameters are `apply_errors(true, errors)`, fixed across
/// trials; only the noise varies. The histogram reduction is a commutative
/// integer sum, so parallel execution is bit-reproducible.
pub fn run_trials(config: &TrialConfig) -> Result<McEstimate> {
    if config.n_trials == 0 {
        return Err(invalid("n_trials must be at least 1"));
    }
    let spec = &config.spec;
    let nu_max = spec.nu_max();
    let per_component = config.errors.resolve(nu_max)?;
    let measured = apply_errors(spec.component_params(), &per_component)?;
    let a0 = spec.component_params()[0].amplitude;
    let sigma = sigma_for_snr(config.snr_db, a0, config.snr_convention);
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid(format!(
            "SNR {} dB with a0 {} gives non-positive noise scale {}",
            config.snr_db, a0, sigma
        )));
    }
    let signal = synthesize(spec, spec.nu_true())?;
    let evaluator = ProfileEvaluator::new(&measured, spec.envelopes())?;
    if evaluator.n_samples() != signal.len() {
        return Err(invalid("envelope bank does not match the signal length"));
    }

    let stream_root = noise::derive_seed(config.base_seed, config.snr_db.to_bits());
    let n = config.n_trials;
    let histogram = (0..n)
        .into_par_iter()
        .fold(
            || vec![0u64; nu_max],
            |mut hist, trial| {
                let seed = noise::derive_seed(stream_root, trial);
                let mut stream = noise::GaussianStream::new(seed);
                let x: Vec<f64> = signal.iter().map(|&s| s + sigma * stream.next_normal()).collect();
                let nu_hat = evaluator
                    .estimate(&x)
                    .expect("dimensions validated before the trial loop");
                hist[nu_hat - 1] += 1;
                hist
            },
        )
        .reduce(
            || vec![0u64; nu_max],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                a
            },
        );

    Ok(McEstimate::from_histogram(
        histogram,
        spec.nu_true(),
        n,
    ))
}

/// One [`run_trials`] per SNR, rows in input order.
///
/// Each SNR keys its own seed substream through the SNR's bit pattern, so the
/// rows use disjoint noise streams and a single-entry list reproduces
/// [`run_trials`] exactly.
pub fn error_curve(config: &TrialConfig, snr_list: &[f64]) -> Result<Vec<(f64, McEstimate)>> {
    if snr_list.is_empty() {
        return Err(invalid("snr_list must not be empty"));
    }
    snr_list
        .iter()
        .map(|&snr_db| {
            let row_config = TrialConfig {
                snr_db,
                ..config.clone()
            };
            run_trials(&row_config).map(|est| (snr_db, est))
        })
        .collect()
}
