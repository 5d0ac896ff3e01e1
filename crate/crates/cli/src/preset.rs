//! Built-in reference scenario.

use crate::config::{ErrorSection, ExperimentConfig, RunSection, SignalSection, SnrDefinition, SnrSetting};

/// The five-tone reference scenario used throughout the validation suite:
/// `a0 = 0.4` on every component, frequencies on a near-uniform grid of
/// spacing `2 pi / 128`, unmodulated envelopes, and the shared relative
/// errors `delta_a = 0.25`, `delta_omega = 0.02`, `delta_phi = 0.1`.
///
/// The default hypothesis pair is `nu_true = 2`, `nu_max = 3`; with five
/// tones listed, raising `nu_max` to 5 (and `nu_true` to 3) selects the
/// wider variant without touching the parameter lists.
pub fn reference_preset() -> ExperimentConfig {
    let pi = std::f64::consts::PI;
    ExperimentConfig {
        signal: SignalSection {
            n_samples: 128,
            nu_true: 2,
            nu_max: 3,
            amplitudes: vec![0.4; 5],
            frequencies: vec![1.2075, 1.2566, 1.3057, 1.3548, 1.4039],
            phases: vec![0.0, pi / 4.0, pi / 3.0, pi / 5.0, pi / 6.0],
            envelope: "constant".to_string(),
            freq_step: Some(std::f64::consts::TAU / 128.0),
        },
        errors: ErrorSection {
            delta_a: 0.25,
            delta_omega: 0.02,
            delta_phi: 0.1,
            d_amp: None,
            d_freq: None,
            d_phase: None,
        },
        run: RunSection {
            scenario: "reference".to_string(),
            snr_db: SnrSetting::Grid((-15..=-6).map(f64::from).collect()),
            trials: 20_000,
            seed: 1,
            snr_definition: SnrDefinition::SigmaLinear,
            output: None,
        },
    }
}
