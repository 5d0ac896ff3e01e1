//! Experiment configuration: a TOML file with three flat sections
//! (`[signal]`, `[errors]`, `[run]`). Unknown keys are rejected, and
//! parse -> serialize -> parse is the identity.
//!
//! ```toml
//! [signal]
//! n_samples = 128
//! nu_true = 2
//! nu_max = 3
//! amplitudes = [0.4, 0.4, 0.4]
//! frequencies = [1.2075, 1.2566, 1.3057]
//! phases = [0.0, 0.7853981633974483, 1.0471975511965976]
//!
//! [errors]
//! delta_a = 0.25      # relative: d_amp = delta_a * amplitudes[0]
//! delta_omega = 0.02  # relative: d_freq = delta_omega * freq_step
//! delta_phi = 0.1     # absolute, radians
//!
//! [run]
//! snr_db = [-15.0, -14.0, -13.0]
//! trials = 20000
//! seed = 1
//! ```

use serde::{Deserialize, Serialize};

use sinorder::montecarlo::SnrConvention;
use sinorder::{ComponentParams, ErrorSetting, ParamErrors, SignalSpec, TrialConfig};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub signal: SignalSection,
    pub errors: ErrorSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSection {
    pub n_samples: usize,
    /// True number of components present in the data.
    pub nu_true: usize,
    /// Largest hypothesis; the parameter lists must hold at least this many
    /// entries (extra entries are ignored).
    pub nu_max: usize,
    pub amplitudes: Vec<f64>,
    /// Frequencies in radians per sample.
    pub frequencies: Vec<f64>,
    /// Phases in radians.
    pub phases: Vec<f64>,
    /// Envelope choice; only `"constant"` (unmodulated tones) is accepted.
    #[serde(default = "default_envelope")]
    pub envelope: String,
    /// Frequency unit for the relative error `delta_omega`; defaults to
    /// `2 pi / n_samples`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_step: Option<f64>,
}

fn default_envelope() -> String {
    "constant".to_string()
}

/// Shared relative errors (`delta_*`) or per-component absolute triples
/// (`d_*`); the two styles cannot be mixed.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorSection {
    /// Relative amplitude error; absolute `d_amp = delta_a * amplitudes[0]`.
    #[serde(default)]
    pub delta_a: f64,
    /// Relative frequency error; absolute `d_freq = delta_omega * freq_step`.
    #[serde(default)]
    pub delta_omega: f64,
    /// Absolute phase error in radians.
    #[serde(default)]
    pub delta_phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_amp: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_freq: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_phase: Option<Vec<f64>>,
}

impl ErrorSection {
    pub fn is_per_component(&self) -> bool {
        self.d_amp.is_some() || self.d_freq.is_some() || self.d_phase.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_scenario")]
    pub scenario: String,
    /// Fixed SNR (a number) or an SNR grid (an array), in dB.
    pub snr_db: SnrSetting,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub snr_definition: SnrDefinition,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn default_scenario() -> String {
    "custom".to_string()
}

fn default_trials() -> u64 {
    20_000
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrSetting {
    Fixed(f64),
    Grid(Vec<f64>),
}

impl SnrSetting {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SnrSetting::Fixed(z) => vec![*z],
            SnrSetting::Grid(v) => v.clone(),
        }
    }
}

/// Mapping from the SNR scalar to the noise scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrDefinition {
    /// `z = a0^2 / (2 sigma)`.
    #[default]
    SigmaLinear,
    /// `z = a0^2 / (2 sigma^2)`.
    SigmaSquared,
}

impl From<SnrDefinition> for SnrConvention {
    fn from(d: SnrDefinition) -> Self {
        match d {
            SnrDefinition::SigmaLinear => SnrConvention::SigmaLinear,
            SnrDefinition::SigmaSquared => SnrConvention::SigmaSquared,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(origin, e.to_string()))?;
        cfg.validate(origin)?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serialization cannot fail")
    }

    fn validate(&self, origin: &str) -> Result<()> {
        let s = &self.signal;
        let fail = |msg: String| Err(Error::config(origin, msg));
        if s.n_samples == 0 {
            return fail("n_samples must be positive".into());
        }
        if s.nu_max == 0 || s.nu_true == 0 || s.nu_true > s.nu_max {
            return fail(format!(
                "need 1 <= nu_true <= nu_max, got nu_true = {}, nu_max = {}",
                s.nu_true, s.nu_max
            ));
        }
        if s.amplitudes.len() != s.frequencies.len() || s.amplitudes.len() != s.phases.len() {
            return fail(format!(
                "amplitudes/frequencies/phases lengths differ: {}/{}/{}",
                s.amplitudes.len(),
                s.frequencies.len(),
                s.phases.len()
            ));
        }
        if s.amplitudes.len() < s.nu_max {
            return fail(format!(
                "parameter lists hold {} entries but nu_max = {}",
                s.amplitudes.len(),
                s.nu_max
            ));
        }
        if s.envelope != "constant" {
            return fail(format!(
                "unsupported envelope {:?}; only \"constant\" is available",
                s.envelope
            ));
        }
        if let Some(step) = s.freq_step {
            if !(step > 0.0) || !step.is_finite() {
                return fail(format!("freq_step must be positive, got {step}"));
            }
        }
        let e = &self.errors;
        if e.is_per_component() {
            if e.delta_a != 0.0 || e.delta_omega != 0.0 || e.delta_phi != 0.0 {
                return fail("cannot mix shared delta_* and per-component d_* errors".into());
            }
            for (name, list) in [("d_amp", &e.d_amp), ("d_freq", &e.d_freq), ("d_phase", &e.d_phase)]
            {
                if let Some(v) = list {
                    if v.len() != s.nu_max {
                        return fail(format!(
                            "{name} holds {} entries but nu_max = {}",
                            v.len(),
                            s.nu_max
                        ));
                    }
                }
            }
        }
        if self.run.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        Ok(())
    }

    /// Reference amplitude for relative errors and the SNR definition.
    pub fn a0(&self) -> f64 {
        self.signal.amplitudes[0]
    }

    /// Frequency unit behind `delta_omega`.
    pub fn freq_step(&self) -> f64 {
        self.signal
            .freq_step
            .unwrap_or(std::f64::consts::TAU / self.signal.n_samples as f64)
    }

    pub fn snr_convention(&self) -> SnrConvention {
        self.run.snr_definition.into()
    }

    /// Absolute shared error triple from relative settings.
    pub fn shared_errors_from(&self, delta_a: f64, delta_omega: f64, delta_phi: f64) -> ParamErrors {
        ParamErrors::new(
            delta_a * self.a0(),
            delta_omega * self.freq_step(),
            delta_phi,
        )
    }

    pub fn error_setting(&self) -> ErrorSetting {
        let e = &self.errors;
        if e.is_per_component() {
            let n = self.signal.nu_max;
            let zero = vec![0.0; n];
            let amp = e.d_amp.as_deref().unwrap_or(&zero);
            let freq = e.d_freq.as_deref().unwrap_or(&zero);
            let phase = e.d_phase.as_deref().unwrap_or(&zero);
            ErrorSetting::PerComponent(
                (0..n)
                    .map(|i| ParamErrors::new(amp[i], freq[i], phase[i]))
                    .collect(),
            )
        } else {
            ErrorSetting::Shared(self.shared_errors_from(e.delta_a, e.delta_omega, e.delta_phi))
        }
    }

    /// Build the component bank (first `nu_max` entries, constant envelopes).
    pub fn signal_spec(&self) -> Result<SignalSpec> {
        let s = &self.signal;
        let params: Vec<ComponentParams> = (0..s.nu_max)
            .map(|i| ComponentParams::new(s.amplitudes[i], s.frequencies[i], s.phases[i]))
            .collect::<sinorder::Result<_>>()?;
        Ok(SignalSpec::with_constant_envelopes(
            s.n_samples,
            &params,
            s.nu_true,
        )?)
    }

    pub fn trial_config(&self, snr_db: f64) -> Result<TrialConfig> {
        Ok(TrialConfig {
            spec: self.signal_spec()?,
            errors: self.error_setting(),
            snr_db,
            n_trials: self.run.trials,
            base_seed: self.run.seed,
            snr_convention: self.snr_convention(),
        })
    }
}
