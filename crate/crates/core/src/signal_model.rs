//! Deterministic multi-tone signal model and noisy observation generator.
//!
//! A signal is a sum of `nu` modulated sinusoids sampled at integer times
//! `t = 1..=n_samples`:
//!
//! ```text
//! s(t) = sum_i  a_i * f_i(t) * cos(w_i * t - phi_i + psi_i(t))
//! ```
//!
//! where `f_i`, `psi_i` are pre-sampled amplitude/phase envelopes. An
//! observation adds white Gaussian noise of scale `sigma` drawn from a
//! deterministic, seed-keyed stream (see [`noise`]).

use crate::error::{invalid, Result};

const TWO_PI: f64 = std::f64::consts::TAU;

/// Wrap an angle into `[0, 2*pi)`.
fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// Pre-sampled amplitude and phase envelopes of one component.
///
/// `amp[t-1]` holds `f(t)` and `phase[t-1]` holds `psi(t)` for
/// `t = 1..=n_samples`. Envelopes are stored as sequences, not callables, so
/// runs are bit-reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    amp: Vec<f64>,
    phase: Vec<f64>,
}

impl Envelope {
    pub fn new(amp: Vec<f64>, phase: Vec<f64>) -> Result<Self> {
        if amp.is_empty() || amp.len() != phase.len() {
            return Err(invalid(format!(
                "envelope sequences must share a positive length, got {} and {}",
                amp.len(),
                phase.len()
            )));
        }
        if amp.iter().chain(phase.iter()).any(|v| !v.is_finite()) {
            return Err(invalid("envelope entries must be finite"));
        }
        Ok(Self { amp, phase })
    }

    /// The unmodulated envelope `f == 1`, `psi == 0`, which reduces the model
    /// to a plain sum of sinusoids.
    pub fn constant(n_samples: usize) -> Self {
        assert!(n_samples >= 1, "envelope length must be positive");
        Self {
            amp: vec![1.0; n_samples],
            phase: vec![0.0; n_samples],
        }
    }

    pub fn len(&self) -> usize {
        self.amp.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires len >= 1
    }

    pub fn amp(&self) -> &[f64] {
        &self.amp
    }

    pub fn phase(&self) -> &[f64] {
        &self.phase
    }
}

/// Amplitude, frequency (rad/sample) and phase (rad) of one sinusoid.
///
/// `new` canonicalizes frequency and phase into `[0, 2*pi)`. The same type
/// describes true values and error-contaminated measured values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComponentParams {
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
}

impl ComponentParams {
    pub fn new(amplitude: f64, frequency: f64, phase: f64) -> Result<Self> {
        if !amplitude.is_finite() || !frequency.is_finite() || !phase.is_finite() {
            return Err(invalid("component parameters must be finite"));
        }
        Ok(Self {
            amplitude,
            frequency: wrap_angle(frequency),
            phase: wrap_angle(phase),
        })
    }
}

/// Absolute measurement errors on one component's parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamErrors {
    pub d_amp: f64,
    pub d_freq: f64,
    pub d_phase: f64,
}

impl ParamErrors {
    pub fn new(d_amp: f64, d_freq: f64, d_phase: f64) -> Self {
        Self {
            d_amp,
            d_freq,
            d_phase,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }
}

/// Error assignment across components: one shared triple or one per component.
#[derive(Debug, Clone, PartialEq)]
pub enum ErrorSetting {
    Shared(ParamErrors),
    PerComponent(Vec<ParamErrors>),
}

impl ErrorSetting {
    /// Expand to one triple per component.
    pub fn resolve(&self, n_components: usize) -> Result<Vec<ParamErrors>> {
        match self {
            ErrorSetting::Shared(e) => Ok(vec![*e; n_components]),
            ErrorSetting::PerComponent(v) => {
                if v.len() != n_components {
                    return Err(invalid(format!(
                        "per-component errors: expected {} triples, got {}",
                        n_components,
                        v.len()
                    )));
                }
                Ok(v.clone())
            }
        }
    }
}

/// Full description of the deterministic signal: sample count, the component
/// bank (hypotheses `nu = 1..=nu_max` use its prefix), and the true order.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalSpec {
    n_samples: usize,
    components: Vec<ComponentParams>,
    envelopes: Vec<Envelope>,
    nu_true: usize,
}

impl SignalSpec {
    pub fn new(
        n_samples: usize,
        components: Vec<(ComponentParams, Envelope)>,
        nu_true: usize,
    ) -> Result<Self> {
        if n_samples == 0 {
            return Err(invalid("n_samples must be positive"));
        }
        if components.is_empty() {
            return Err(invalid("at least one component is required"));
        }
        if nu_true == 0 || nu_true > components.len() {
            return Err(invalid(format!(
                "nu_true must lie in 1..={}, got {}",
                components.len(),
                nu_true
            )));
        }
        for (i, (_, env)) in components.iter().enumerate() {
            if env.len() != n_samples {
                return Err(invalid(format!(
                    "envelope {} has length {}, expected {}",
                    i + 1,
                    env.len(),
                    n_samples
                )));
            }
        }
        let (params, envelopes) = components.into_iter().unzip();
        Ok(Self {
            n_samples,
            components: params,
            envelopes,
            nu_true,
        })
    }

    /// Sum-of-sinusoids spec: every component gets the constant envelope.
    pub fn with_constant_envelopes(
        n_samples: usize,
        params: &[ComponentParams],
        nu_true: usize,
    ) -> Result<Self> {
        let components = params
            .iter()
            .map(|p| (*p, Envelope::constant(n_samples.max(1))))
            .collect();
        Self::new(n_samples, components, nu_true)
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn nu_true(&self) -> usize {
        self.nu_true
    }

    /// Largest hypothesis, equal to the number of components.
    pub fn nu_max(&self) -> usize {
        self.components.len()
    }

    pub fn component_params(&self) -> &[ComponentParams] {
        &self.components
    }

    pub fn envelopes(&self) -> &[Envelope] {
        &self.envelopes
    }
}

/// One noisy record `x(t) = s(t) + sigma * n(t)` together with its noise scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    samples: Vec<f64>,
    sigma: f64,
}

impl Observation {
    pub fn new(samples: Vec<f64>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid(format!("sigma must be positive, got {sigma}")));
        }
        if samples.is_empty() {
            return Err(invalid("observation must contain at least one sample"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("observation samples must be finite"));
        }
        Ok(Self { samples, sigma })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// Evaluate the noiseless model with the first `nu` components at
/// `t = 1..=n_samples`.
///
/// Components are accumulated in bank order, each sample left to right.
pub fn synthesize(spec: &SignalSpec, nu: usize) -> Result<Vec<f64>> {
    if nu == 0 || nu > spec.nu_max() {
        return Err(invalid(format!(
            "nu must lie in 1..={}, got {}",
            spec.nu_max(),
            nu
        )));
    }
    let mut out = vec![0.0; spec.n_samples];
    for i in 0..nu {
        let p = &spec.components[i];
        let env = &spec.envelopes[i];
        for (t_idx, sample) in out.iter_mut().enumerate() {
            let t = (t_idx + 1) as f64;
            *sample +=
                p.amplitude * env.amp[t_idx] * (p.frequency * t - p.phase + env.phase[t_idx]).cos();
        }
    }
    Ok(out)
}

/// Generate `x(t) = s(t) + sigma * n(t)` with `s` built from the true order
/// and `n` standard normal from the stream keyed by `seed`.
///
/// Identical `(spec, sigma, seed)` yields bit-identical output.
pub fn observe(spec: &SignalSpec, sigma: f64, seed: u64) -> Result<Observation> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let mut samples = synthesize(spec, spec.nu_true)?;
    let mut stream = noise::GaussianStream::new(seed);
    for s in &mut samples {
        *s += sigma * stream.next_normal();
    }
    Observation::new(samples, sigma)
}

/// Add measurement errors component-wise: `a* = a0 + d_amp`,
/// `w* = wrap(w0 + d_freq)`, `phi* = wrap(phi0 + d_phase)`.
pub fn apply_errors(
    true_params: &[ComponentParams],
    errors: &[ParamErrors],
) -> Result<Vec<ComponentParams>> {
    if true_params.len() != errors.len() {
        return Err(invalid(format!(
            "parameter/error length mismatch: {} vs {}",
            true_params.len(),
            errors.len()
        )));
    }
    true_params
        .iter()
        .zip(errors)
        .map(|(p, e)| {
            ComponentParams::new(
                p.amplitude + e.d_amp,
                p.frequency + e.d_freq,
                p.phase + e.d_phase,
            )
        })
        .collect()
}

pub mod noise {
    //! Deterministic standard-normal stream.
    //!
    //! The generator is fixed so Monte Carlo results reproduce bit-for-bit
    //! across runs and machines:
    //!
    //! 1. the `u64` seed expands to a ChaCha8 key via the SplitMix64 expansion
    //!    of `rand_core`'s `seed_from_u64`;
    //! 2. uniform doubles come from the top 53 bits of each `next_u64`;
    //! 3. normals are produced by the Box-Muller transform, pairwise, with the
    //!    second value cached for the next call.

    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    /// Standard-normal stream keyed by a single seed.
    #[derive(Debug, Clone)]
    pub struct GaussianStream {
        rng: ChaCha8Rng,
        spare: Option<f64>,
    }

    impl GaussianStream {
        pub fn new(seed: u64) -> Self {
            Self {
                rng: ChaCha8Rng::seed_from_u64(seed),
                spare: None,
            }
        }

        pub fn next_normal(&mut self) -> f64 {
            if let Some(v) = self.spare.take() {
                return v;
            }
            // u1 in (0, 1] keeps ln finite; u2 in [0, 1).
            let u1 = ((self.rng.next_u64() >> 11) + 1) as f64 * 2f64.powi(-53);
            let u2 = (self.rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
            let radius = (-2.0 * u1.ln()).sqrt();
            let (sin, cos) = (std::f64::consts::TAU * u2).sin_cos();
            self.spare = Some(radius * sin);
            radius * cos
        }

        pub fn fill(&mut self, out: &mut [f64]) {
            for v in out {
                *v = self.next_normal();
            }
        }
    }

    fn splitmix64(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Derive a child seed from a root seed and a stream index.
    ///
    /// `splitmix64(splitmix64(root) + index)`: bijective in `index` for a
    /// fixed root, so enumerated substreams never collide, and independent of
    /// evaluation order.
    pub fn derive_seed(root: u64, index: u64) -> u64 {
        splitmix64(splitmix64(root).wrapping_add(index))
    }
}
