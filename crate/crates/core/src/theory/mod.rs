//! Closed-form performance analysis of the quasi-likelihood order estimate.
//!
//! The decision between the true order `nu0` and its two adjacent hypotheses
//! reduces to a pair of unit-variance Gaussian statistics with margins `R`
//! and `Q` and correlation `rho`. The abridged error probability is then
//!
//! ```text
//! p_a = 1 - Pr(xi_{nu0} > -R,  xi_{nu0+1} < Q)
//! ```
//!
//! evaluated here by adaptive quadrature (exact) or by a two-term tail
//! expansion (approximate, valid for `min(Q, R) > 3`, `|rho| < 0.9`).
//!
//! `rho` is computed as `K**_{nu0,nu0+1} / sqrt(K**_{nu0,nu0} K**_{nu0+1,nu0+1})`:
//! the correlation of two unit-variance noise projections cannot depend on
//! the noise scale, and the Monte Carlo projection oracle in the test suite
//! pins this form down.

mod normal;

pub use normal::normal_cdf;
use normal::normal_pdf;

use crate::accum::KahanSum;
use crate::error::{degenerate, invalid, Result};
use crate::likelihood::{k_double_star, k_star};
use crate::signal_model::{apply_errors, ComponentParams, Envelope, ParamErrors, SignalSpec};

/// The margin/correlation triple feeding the abridged error probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionStats {
    pub r: f64,
    pub q: f64,
    pub rho: f64,
}

/// Noise projected onto one reference waveform: `eta` in signal units and its
/// standardized form `xi = eta / (sigma * sqrt(K_ii))`.
///
/// Used as a simulation oracle for validating [`decision_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseProjection {
    pub eta: f64,
    pub xi: f64,
}

impl NoiseProjection {
    /// Project a unit-variance noise realization onto the reference waveform
    /// of `params`/`env`.
    pub fn from_noise(
        noise: &[f64],
        params: &ComponentParams,
        env: &Envelope,
        sigma: f64,
    ) -> Result<Self> {
        if noise.len() != env.len() {
            return Err(invalid(format!(
                "noise length {} does not match envelope length {}",
                noise.len(),
                env.len()
            )));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        let mut acc = KahanSum::new();
        for (t_idx, n) in noise.iter().enumerate() {
            let t = (t_idx + 1) as f64;
            acc.add(
                n * env.amp()[t_idx]
                    * (params.frequency * t + env.phase()[t_idx] - params.phase).cos(),
            );
        }
        let eta = sigma * acc.total();
        let k_ii = k_double_star(params, env, params, env)?;
        if k_ii <= 0.0 {
            return Err(degenerate("zero-energy reference waveform"));
        }
        Ok(Self {
            eta,
            xi: eta / (sigma * k_ii.sqrt()),
        })
    }
}

/// Compute `(R, Q, rho)` for a true order `nu0` from the true and measured
/// parameter sets.
///
/// `R` is the normalized margin of `L(nu0)` over `L(nu0 - 1)` (the part not
/// carried by noise), `Q` the margin over `L(nu0 + 1)`; components `nu0` and
/// `nu0 + 1` must both be defined.
pub fn decision_stats(
    true_params: &[ComponentParams],
    measured: &[ComponentParams],
    envelopes: &[Envelope],
    sigma: f64,
    nu0: usize,
) -> Result<DecisionStats> {
    if nu0 == 0 {
        return Err(invalid("nu0 must be at least 1"));
    }
    if measured.len() < nu0 + 1 || envelopes.len() < nu0 + 1 {
        return Err(invalid(format!(
            "components 1..={} required, got {} measured / {} envelopes",
            nu0 + 1,
            measured.len(),
            envelopes.len()
        )));
    }
    if true_params.len() < nu0 {
        return Err(invalid(format!(
            "true parameters 1..={} required, got {}",
            nu0,
            true_params.len()
        )));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }

    // 1-based helpers over the shared envelope bank.
    let kss = |i: usize, j: usize| {
        k_double_star(
            &measured[i - 1],
            &envelopes[i - 1],
            &measured[j - 1],
            &envelopes[j - 1],
        )
    };
    let ks = |i: usize, j: usize| {
        k_star(
            &measured[i - 1],
            &true_params[j - 1],
            &envelopes[i - 1],
            &envelopes[j - 1],
        )
    };

    let k_n_n = kss(nu0, nu0)?;
    let k_n1_n1 = kss(nu0 + 1, nu0 + 1)?;
    if k_n_n <= 0.0 || k_n1_n1 <= 0.0 {
        return Err(degenerate(format!(
            "zero diagonal correlation at order {nu0} or {}",
            nu0 + 1
        )));
    }

    let mut r_num = -0.5 * measured[nu0 - 1].amplitude * k_n_n;
    for j in 1..=nu0 {
        r_num += true_params[j - 1].amplitude * ks(nu0, j)?;
    }
    for j in 1..nu0 {
        r_num -= measured[j - 1].amplitude * kss(nu0, j)?;
    }
    let r = r_num / (sigma * k_n_n.sqrt());

    let mut q_num = 0.5 * measured[nu0].amplitude * k_n1_n1;
    for j in 1..=nu0 {
        q_num -= true_params[j - 1].amplitude * ks(nu0 + 1, j)?;
        q_num += measured[j - 1].amplitude * kss(nu0 + 1, j)?;
    }
    let q = q_num / (sigma * k_n1_n1.sqrt());

    let rho = kss(nu0, nu0 + 1)? / (k_n_n * k_n1_n1).sqrt();
    Ok(DecisionStats { r, q, rho })
}

/// Adaptive Simpson quadrature with bisection, absolute tolerance `tol`.
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a >= b {
        return 0.0;
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

const RHO_TOLERANCE: f64 = 1e-12;
const RHO_DEGENERATE: f64 = 1e-10;
// Gaussian mass beyond 12 is below 1.8e-33, so truncating the quadrature
// there discards less than 1e-14 of probability by a wide margin.
const TAIL_CUTOFF: f64 = 12.0;

fn validate_stats(stats: &DecisionStats) -> Result<(f64, f64, f64)> {
    if stats.r.is_nan() || stats.q.is_nan() || stats.rho.is_nan() {
        return Err(invalid("decision statistics must not be NaN"));
    }
    if stats.rho.abs() > 1.0 + RHO_TOLERANCE {
        return Err(invalid(format!(
            "|rho| must not exceed 1, got {}",
            stats.rho
        )));
    }
    Ok((stats.r, stats.q, stats.rho.clamp(-1.0, 1.0)))
}

/// Exact abridged error probability.
///
/// Evaluated in the complement form `Phi(-R) + Phi(-Q) - T` with
/// `T = integral_Q^inf phi(y) Phi((-R - rho y)/sqrt(1-rho^2)) dy`, which is
/// algebraically identical to integrating up to `Q` but keeps full relative
/// accuracy deep in the tails. Result clamped to `[0, 1]`; absolute error is
/// far below the 1e-8 budget.
pub fn abridged_error_exact(stats: &DecisionStats) -> Result<f64> {
    let (r, q, rho) = validate_stats(stats)?;
    let phi_r = normal_cdf(-r);
    let phi_q = normal_cdf(-q);
    let scale = phi_r + phi_q;
    if scale == 0.0 {
        return Ok(0.0);
    }

    let t = if 1.0 - rho.abs() < RHO_DEGENERATE {
        // The inner CDF collapses to an indicator; the joint tail becomes a
        // one-dimensional truncated-normal probability.
        if rho > 0.0 {
            (phi_r - normal_cdf(q)).max(0.0)
        } else {
            normal_cdf(-r.max(q))
        }
    } else {
        let inv_s = 1.0 / ((1.0 - rho) * (1.0 + rho)).sqrt();
        let lo = q.max(-TAIL_CUTOFF);
        let hi = TAIL_CUTOFF;
        if lo >= hi {
            0.0
        } else {
            let integrand = |y: f64| normal_pdf(y) * normal_cdf((-r - rho * y) * inv_s);
            adaptive_simpson(&integrand, lo, hi, (1e-11 * scale).max(1e-300))
        }
    };
    Ok((phi_r + phi_q - t).clamp(0.0, 1.0))
}

/// Two-term tail approximation of the abridged error probability:
/// `1 - Phi(R) Phi(Q) + (rho / 2 pi) exp(-R^2/2) exp(-Q^2/2)`.
///
/// The leading term is evaluated through the identity
/// `1 - Phi(R) Phi(Q) = Phi(-R) + Phi(-Q) - Phi(-R) Phi(-Q)`, which avoids
/// the cancellation against 1 and keeps relative accuracy in the far tails.
/// May leave `[0, 1]` slightly outside its validity region.
pub fn abridged_error_approx(stats: &DecisionStats) -> f64 {
    let r = stats.r;
    let q = stats.q;
    let phi_r = normal_cdf(-r);
    let phi_q = normal_cdf(-q);
    phi_r + phi_q - phi_r * phi_q
        + stats.rho / std::f64::consts::TAU * (-0.5 * r * r).exp() * (-0.5 * q * q).exp()
}

/// Whether the approximation is inside its validity region:
/// `min(Q, R) > 3` and `|rho| < 0.9`.
pub fn approx_valid(stats: &DecisionStats) -> bool {
    stats.r.min(stats.q) > 3.0 && stats.rho.abs() < 0.9
}

/// Exact and approximate abridged error probability plus the validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbridgedResult {
    pub p_exact: f64,
    pub p_approx: f64,
    pub approx_valid: bool,
}

/// Evaluate both forms at once.
pub fn abridged_error(stats: &DecisionStats) -> Result<AbridgedResult> {
    Ok(AbridgedResult {
        p_exact: abridged_error_exact(stats)?,
        p_approx: abridged_error_approx(stats),
        approx_valid: approx_valid(stats),
    })
}

/// Closed intervals for one component's parameter errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamErrorBounds {
    pub amp: (f64, f64),
    pub freq: (f64, f64),
    pub phase: (f64, f64),
}

impl ParamErrorBounds {
    /// Degenerate box holding a single point.
    pub fn point(e: ParamErrors) -> Self {
        Self {
            amp: (e.d_amp, e.d_amp),
            freq: (e.d_freq, e.d_freq),
            phase: (e.d_phase, e.d_phase),
        }
    }

    /// Symmetric box `[-w, +w]` per parameter.
    pub fn symmetric(amp_halfwidth: f64, freq_halfwidth: f64, phase_halfwidth: f64) -> Self {
        Self {
            amp: (-amp_halfwidth.abs(), amp_halfwidth.abs()),
            freq: (-freq_halfwidth.abs(), freq_halfwidth.abs()),
            phase: (-phase_halfwidth.abs(), phase_halfwidth.abs()),
        }
    }

    fn validate(&self) -> Result<()> {
        for (lo, hi) in [self.amp, self.freq, self.phase] {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(invalid(format!("invalid error interval [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn intervals(&self) -> [(f64, f64); 3] {
        [self.amp, self.freq, self.phase]
    }
}

/// Error box over which the worst-case search runs: one shared interval
/// triple, or one triple per component.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorBox {
    bounds: Vec<ParamErrorBounds>,
    shared: bool,
}

impl ErrorBox {
    pub fn shared(bounds: ParamErrorBounds) -> Result<Self> {
        bounds.validate()?;
        Ok(Self {
            bounds: vec![bounds],
            shared: true,
        })
    }

    pub fn per_component(bounds: Vec<ParamErrorBounds>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(invalid("per-component error box must not be empty"));
        }
        for b in &bounds {
            b.validate()?;
        }
        Ok(Self {
            bounds,
            shared: false,
        })
    }

    pub fn is_shared(&self) -> bool {
        self.shared
    }

    pub fn bounds(&self) -> &[ParamErrorBounds] {
        &self.bounds
    }
}

/// Result of the worst-case search: the maximal probability and the
/// maximizing error assignment (one triple when the box is shared).
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCase {
    pub p_max: f64,
    pub errors: Vec<ParamErrors>,
}

/// Knobs for the worst-case search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Grid points per active dimension of the coarse scan.
    pub grid_points: usize,
    /// Evaluation budget of the derivative-free local refinement.
    pub max_refine_evals: usize,
    /// Passes of the coordinate-wise scan used above six active dimensions.
    pub cyclic_passes: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            grid_points: 11,
            max_refine_evals: 400,
            cyclic_passes: 8,
        }
    }
}

struct BoxDim {
    slot: usize,
    lo: f64,
    hi: f64,
}

/// Maximize the exact abridged error probability over the error box.
///
/// Coarse grid scan (lexicographic order, strict improvement, so ties go to
/// the lexicographically smallest triple) followed by a compass-search
/// refinement from the best grid point; above six active dimensions the grid
/// is replaced by cyclic coordinate scans. The result always dominates every
/// scanned grid point.
pub fn worst_case_abridged(
    spec: &SignalSpec,
    error_box: &ErrorBox,
    sigma: f64,
    nu0: usize,
) -> Result<WorstCase> {
    worst_case_abridged_with(spec, error_box, sigma, nu0, &SearchOptions::default())
}

/// [`worst_case_abridged`] with explicit search options.
pub fn worst_case_abridged_with(
    spec: &SignalSpec,
    error_box: &ErrorBox,
    sigma: f64,
    nu0: usize,
    opts: &SearchOptions,
) -> Result<WorstCase> {
    if nu0 + 1 > spec.nu_max() {
        return Err(invalid(format!(
            "nu0 + 1 = {} exceeds the component bank size {}",
            nu0 + 1,
            spec.nu_max()
        )));
    }
    if !error_box.shared && error_box.bounds.len() != spec.nu_max() {
        return Err(invalid(format!(
            "per-component box needs {} triples, got {}",
            spec.nu_max(),
            error_box.bounds.len()
        )));
    }
    if opts.grid_points < 2 {
        return Err(invalid("grid_points must be at least 2"));
    }

    let n_slots = error_box.bounds.len() * 3;
    let mut point = vec![0.0; n_slots];
    let mut dims: Vec<BoxDim> = Vec::new();
    for (b_idx, b) in error_box.bounds.iter().enumerate() {
        for (p_idx, (lo, hi)) in b.intervals().into_iter().enumerate() {
            let slot = b_idx * 3 + p_idx;
            point[slot] = lo;
            if hi > lo {
                dims.push(BoxDim { slot, lo, hi });
            }
        }
    }

    let to_errors = |flat: &[f64]| -> Vec<ParamErrors> {
        flat.chunks_exact(3)
            .map(|c| ParamErrors::new(c[0], c[1], c[2]))
            .collect()
    };
    let evaluate = |flat: &[f64]| -> Result<f64> {
        let triples = to_errors(flat);
        let per_component = if error_box.shared {
            vec![triples[0]; spec.nu_max()]
        } else {
            triples
        };
        let measured = apply_errors(spec.component_params(), &per_component)?;
        let stats = decision_stats(
            spec.component_params(),
            &measured,
            spec.envelopes(),
            sigma,
            nu0,
        )?;
        abridged_error_exact(&stats)
    };

    let mut best = evaluate(&point)?;
    let mut best_point = point.clone();

    if !dims.is_empty() {
        let k = opts.grid_points;
        let grid_value = |d: &BoxDim, i: usize| d.lo + (d.hi - d.lo) * i as f64 / (k - 1) as f64;

        if dims.len() <= 6 {
            // full grid, odometer in lexicographic order
            let mut idx = vec![0usize; dims.len()];
            loop {
                for (d, &i) in dims.iter().zip(&idx) {
                    point[d.slot] = grid_value(d, i);
                }
                let p = evaluate(&point)?;
                if p > best {
                    best = p;
                    best_point.copy_from_slice(&point);
                }
                let mut carry = dims.len();
                while carry > 0 {
                    idx[carry - 1] += 1;
                    if idx[carry - 1] < k {
                        break;
                    }
                    idx[carry - 1] = 0;
                    carry -= 1;
                }
                if carry == 0 {
                    break;
                }
            }
        } else {
            // cyclic coordinate scans from the box midpoint
            for d in &dims {
                point[d.slot] = 0.5 * (d.lo + d.hi);
            }
            let mut current = evaluate(&point)?;
            if current > best {
                best = current;
                best_point.copy_from_slice(&point);
            }
            for _ in 0..opts.cyclic_passes {
                let mut improved = false;
                for d in &dims {
                    let saved = point[d.slot];
                    let mut best_val = saved;
                    for i in 0..k {
                        point[d.slot] = grid_value(d, i);
                        let p = evaluate(&point)?;
                        if p > current {
                            current = p;
                            best_val = point[d.slot];
                            improved = true;
                        }
                    }
                    point[d.slot] = best_val;
                }
                if current > best {
                    best = current;
                    best_point.copy_from_slice(&point);
                }
                if !improved {
                    break;
                }
            }
        }

        // compass refinement from the best point found so far
        point.copy_from_slice(&best_point);
        let mut steps: Vec<f64> = dims
            .iter()
            .map(|d| 0.5 * (d.hi - d.lo) / (k - 1) as f64)
            .collect();
        let tols: Vec<f64> = dims.iter().map(|d| 1e-9 * (d.hi - d.lo)).collect();
        let mut evals = 0usize;
        while evals < opts.max_refine_evals && steps.iter().zip(&tols).any(|(s, t)| s >= t) {
            let mut improved = false;
            for (di, d) in dims.iter().enumerate() {
                for cand in [point[d.slot] - steps[di], point[d.slot] + steps[di]] {
                    let cand = cand.clamp(d.lo, d.hi);
                    if cand == point[d.slot] {
                        continue;
                    }
                    let saved = point[d.slot];
                    point[d.slot] = cand;
                    let p = evaluate(&point)?;
                    evals += 1;
                    if p > best {
                        best = p;
                        best_point.copy_from_slice(&point);
                        improved = true;
                    } else {
                        point[d.slot] = saved;
                    }
                    if evals >= opts.max_refine_evals {
                        break;
                    }
                }
                if evals >= opts.max_refine_evals {
                    break;
                }
            }
            if !improved {
                for s in &mut steps {
                    *s *= 0.5;
                }
            }
        }
    }

    Ok(WorstCase {
        p_max: best,
        errors: to_errors(&best_point),
    })
}
