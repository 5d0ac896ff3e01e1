//! Cross-correlation coefficients, the substituted log-likelihood, and the
//! quasi-likelihood order estimate.
//!
//! The estimator scores each hypothesis `nu` with
//!
//! ```text
//! L(nu) = (1/sigma^2) * sum_{i<=nu} a*_i * sum_t x(t) f_i(t) cos(w*_i t + psi_i(t) - phi*_i)
//!       - (1/(2 sigma^2)) * sum_{i,j<=nu} a*_i a*_j K**_{i,j}
//! ```
//!
//! and picks `argmax_nu L(nu)`, where the starred quantities are measured
//! (error-contaminated) parameter values. No parameter estimation happens
//! anywhere: the measured values are substituted as-is.
//!
//! `K**` correlates two measured reference waveforms, `K*` a measured one
//! against a true one. Both carry the envelope product `f_i f_j`, which keeps
//! them consistent with their difference/sum-frequency decomposition
//! ([`decompose_k`]); for constant envelopes the two conventions coincide.

use crate::accum::{kahan_dot, KahanSum};
use crate::error::{invalid, Result};
use crate::signal_model::{ComponentParams, Envelope, Observation};

/// Half-sums of the envelope-weighted cosines/sines at the difference and sum
/// frequencies of one `(i, j)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationDecomposition {
    pub v_cos: f64,
    pub v_sin: f64,
    pub w_cos: f64,
    pub w_sin: f64,
}

impl CorrelationDecomposition {
    /// Rebuild the full correlation sum from the four coefficients and the
    /// two phases. Equals the direct cross-correlation of the same pair.
    pub fn recompose(&self, phase_i: f64, phase_j: f64) -> f64 {
        let diff = phase_i - phase_j;
        let sum = phase_i + phase_j;
        self.v_cos * diff.cos() + self.v_sin * diff.sin() + self.w_cos * sum.cos()
            + self.w_sin * sum.sin()
    }
}

fn check_envelopes(i_env: &Envelope, j_env: &Envelope) -> Result<usize> {
    if i_env.len() != j_env.len() {
        return Err(invalid(format!(
            "envelope length mismatch: {} vs {}",
            i_env.len(),
            j_env.len()
        )));
    }
    Ok(i_env.len())
}

/// `sum_t f_i(t) f_j(t) cos(w_i t + psi_i(t) - phi_i) cos(w_j t + psi_j(t) - phi_j)`.
fn correlation_sum(
    i: &ComponentParams,
    i_env: &Envelope,
    j: &ComponentParams,
    j_env: &Envelope,
) -> Result<f64> {
    let n = check_envelopes(i_env, j_env)?;
    let mut acc = KahanSum::new();
    for t_idx in 0..n {
        let t = (t_idx + 1) as f64;
        let ci = i_env.amp()[t_idx] * (i.frequency * t + i_env.phase()[t_idx] - i.phase).cos();
        let cj = j_env.amp()[t_idx] * (j.frequency * t + j_env.phase()[t_idx] - j.phase).cos();
        acc.add(ci * cj);
    }
    Ok(acc.total())
}

/// Correlation of two measured reference waveforms, symmetric in `(i, j)`.
pub fn k_double_star(
    i_params: &ComponentParams,
    i_env: &Envelope,
    j_params: &ComponentParams,
    j_env: &Envelope,
) -> Result<f64> {
    correlation_sum(i_params, i_env, j_params, j_env)
}

/// Correlation of the measured waveform of component `i` against the true
/// waveform of component `j`.
pub fn k_star(
    i_measured: &ComponentParams,
    j_true: &ComponentParams,
    i_env: &Envelope,
    j_env: &Envelope,
) -> Result<f64> {
    correlation_sum(i_measured, i_env, j_true, j_env)
}

/// Split a correlation sum into its difference/sum-frequency coefficients.
///
/// Passing measured parameters for both components gives the `K**`
/// decomposition; passing a true `j` gives the `K*` one.
pub fn decompose_k(
    i_params: &ComponentParams,
    i_env: &Envelope,
    j_params: &ComponentParams,
    j_env: &Envelope,
) -> Result<CorrelationDecomposition> {
    let n = check_envelopes(i_env, j_env)?;
    let (mut vc, mut vs, mut wc, mut ws) = (
        KahanSum::new(),
        KahanSum::new(),
        KahanSum::new(),
        KahanSum::new(),
    );
    for t_idx in 0..n {
        let t = (t_idx + 1) as f64;
        let ff = i_env.amp()[t_idx] * j_env.amp()[t_idx];
        let arg_diff = (i_params.frequency - j_params.frequency) * t + i_env.phase()[t_idx]
            - j_env.phase()[t_idx];
        let arg_sum = (i_params.frequency + j_params.frequency) * t
            + i_env.phase()[t_idx]
            + j_env.phase()[t_idx];
        let (sd, cd) = arg_diff.sin_cos();
        let (ss, cs) = arg_sum.sin_cos();
        vc.add(ff * cd);
        vs.add(ff * sd);
        wc.add(ff * cs);
        ws.add(ff * ss);
    }
    Ok(CorrelationDecomposition {
        v_cos: 0.5 * vc.total(),
        v_sin: 0.5 * vs.total(),
        w_cos: 0.5 * wc.total(),
        w_sin: 0.5 * ws.total(),
    })
}

/// Log-likelihood values for every hypothesis `nu = 1..=nu_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodProfile {
    values: Vec<f64>,
}

impl LikelihoodProfile {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `L(nu)`, if `nu` is a hypothesis of this profile.
    pub fn value(&self, nu: usize) -> Option<f64> {
        if nu == 0 {
            None
        } else {
            self.values.get(nu - 1).copied()
        }
    }

    pub fn nu_max(&self) -> usize {
        self.values.len()
    }

    /// Maximizing order; ties break toward the smallest `nu`.
    pub fn argmax_nu(&self) -> usize {
        let mut best = 0;
        for (idx, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = idx;
            }
        }
        best + 1
    }
}

/// Precomputed reference waveforms and quadratic terms for repeated profile
/// evaluation over many observations with the same measured parameters.
#[derive(Debug, Clone)]
pub struct ProfileEvaluator {
    waveforms: Vec<Vec<f64>>,
    amplitudes: Vec<f64>,
    quad_partial: Vec<f64>,
    n_samples: usize,
}

impl ProfileEvaluator {
    pub fn new(measured: &[ComponentParams], envelopes: &[Envelope]) -> Result<Self> {
        if measured.is_empty() {
            return Err(invalid("at least one component is required"));
        }
        if measured.len() != envelopes.len() {
            return Err(invalid(format!(
                "parameter/envelope length mismatch: {} vs {}",
                measured.len(),
                envelopes.len()
            )));
        }
        let n_samples = envelopes[0].len();
        let mut waveforms = Vec::with_capacity(measured.len());
        for (p, env) in measured.iter().zip(envelopes) {
            if env.len() != n_samples {
                return Err(invalid("envelopes must share one length"));
            }
            let wave: Vec<f64> = (0..n_samples)
                .map(|t_idx| {
                    let t = (t_idx + 1) as f64;
                    env.amp()[t_idx] * (p.frequency * t + env.phase()[t_idx] - p.phase).cos()
                })
                .collect();
            waveforms.push(wave);
        }
        let amplitudes: Vec<f64> = measured.iter().map(|p| p.amplitude).collect();

        // quad_partial[v-1] = sum_{i,j<=v} a_i a_j K**_{i,j}, built one
        // row/column at a time.
        let mut quad_partial = Vec::with_capacity(measured.len());
        let mut running = 0.0;
        for v in 0..measured.len() {
            let mut cross = 0.0;
            for j in 0..v {
                cross += amplitudes[j] * kahan_dot(&waveforms[v], &waveforms[j]);
            }
            let diag = kahan_dot(&waveforms[v], &waveforms[v]);
            running += amplitudes[v] * (2.0 * cross + amplitudes[v] * diag);
            quad_partial.push(running);
        }
        Ok(Self {
            waveforms,
            amplitudes,
            quad_partial,
            n_samples,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn nu_max(&self) -> usize {
        self.waveforms.len()
    }

    /// The sigma-free margins `sum_{i<=nu} a_i d_i - quad(nu)/2`, one per
    /// hypothesis. `L(nu)` is these scaled by `1/sigma^2`.
    fn margins(&self, samples: &[f64]) -> Result<Vec<f64>> {
        if samples.len() != self.n_samples {
            return Err(invalid(format!(
                "sample length mismatch: {} vs {}",
                samples.len(),
                self.n_samples
            )));
        }
        let mut margins = Vec::with_capacity(self.nu_max());
        let mut data_cum = 0.0;
        for v in 0..self.nu_max() {
            data_cum += self.amplitudes[v] * kahan_dot(samples, &self.waveforms[v]);
            margins.push(data_cum - 0.5 * self.quad_partial[v]);
        }
        Ok(margins)
    }

    /// Incremental profile: hypothesis `nu` adds one data term and one
    /// row/column of the quadratic form on top of hypothesis `nu - 1`.
    pub fn profile(&self, samples: &[f64], sigma: f64) -> Result<LikelihoodProfile> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        let inv_var = 1.0 / (sigma * sigma);
        let values = self
            .margins(samples)?
            .into_iter()
            .map(|m| inv_var * m)
            .collect();
        Ok(LikelihoodProfile { values })
    }

    /// Maximizing order, ties toward the smallest.
    ///
    /// Computed on the sigma-free margins: the `1/sigma^2` factor is positive
    /// and cannot move the maximizer, and skipping it keeps the comparison
    /// exact even for noise scales whose square under- or overflows.
    pub fn estimate(&self, samples: &[f64]) -> Result<usize> {
        let margins = self.margins(samples)?;
        let mut best = 0;
        for (idx, &v) in margins.iter().enumerate() {
            if v > margins[best] {
                best = idx;
            }
        }
        Ok(best + 1)
    }
}

/// Direct (non-incremental) evaluation of `L(nu)` with the measured values
/// substituted for the unknown parameters.
pub fn log_likelihood(
    x: &Observation,
    nu: usize,
    measured: &[ComponentParams],
    envelopes: &[Envelope],
) -> Result<f64> {
    if nu == 0 || nu > measured.len() {
        return Err(invalid(format!(
            "nu must lie in 1..={}, got {}",
            measured.len(),
            nu
        )));
    }
    if measured.len() != envelopes.len() {
        return Err(invalid(format!(
            "parameter/envelope length mismatch: {} vs {}",
            measured.len(),
            envelopes.len()
        )));
    }
    let n = x.samples().len();
    for env in &envelopes[..nu] {
        if env.len() != n {
            return Err(invalid(format!(
                "envelope length {} does not match observation length {}",
                env.len(),
                n
            )));
        }
    }

    let mut data_term = 0.0;
    for i in 0..nu {
        let p = &measured[i];
        let env = &envelopes[i];
        let mut acc = KahanSum::new();
        for t_idx in 0..n {
            let t = (t_idx + 1) as f64;
            acc.add(
                x.samples()[t_idx]
                    * env.amp()[t_idx]
                    * (p.frequency * t + env.phase()[t_idx] - p.phase).cos(),
            );
        }
        data_term += p.amplitude * acc.total();
    }

    let mut quad_term = 0.0;
    for i in 0..nu {
        for j in 0..nu {
            quad_term += measured[i].amplitude
                * measured[j].amplitude
                * k_double_star(&measured[i], &envelopes[i], &measured[j], &envelopes[j])?;
        }
    }

    let inv_var = 1.0 / (x.sigma() * x.sigma());
    Ok(inv_var * data_term - 0.5 * inv_var * quad_term)
}

/// `L(nu)` for every hypothesis `nu = 1..=len(measured)`, computed
/// incrementally.
pub fn likelihood_profile(
    x: &Observation,
    measured: &[ComponentParams],
    envelopes: &[Envelope],
) -> Result<LikelihoodProfile> {
    ProfileEvaluator::new(measured, envelopes)?.profile(x.samples(), x.sigma())
}

/// Quasi-likelihood order estimate: the hypothesis minimizing `-L(nu)`,
/// ties broken toward the smallest order.
pub fn ql_estimate(
    x: &Observation,
    measured: &[ComponentParams],
    envelopes: &[Envelope],
) -> Result<usize> {
    ProfileEvaluator::new(measured, envelopes)?.estimate(x.samples())
}
