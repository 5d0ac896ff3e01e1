//! Shared fixtures for the criterion benchmarks.

use sinorder::{ComponentParams, SignalSpec};

/// Five reference tones on a `2 pi / n_samples` grid.
pub fn reference_components(count: usize) -> Vec<ComponentParams> {
    let freqs = [1.2075, 1.2566, 1.3057, 1.3548, 1.4039];
    let phases = [
        0.0,
        std::f64::consts::PI / 4.0,
        std::f64::consts::PI / 3.0,
        std::f64::consts::PI / 5.0,
        std::f64::consts::PI / 6.0,
    ];
    freqs[..count]
        .iter()
        .zip(&phases[..count])
        .map(|(&w, &p)| ComponentParams::new(0.4, w, p).expect("finite parameters"))
        .collect()
}

pub fn reference_spec(n_samples: usize, nu_true: usize, nu_max: usize) -> SignalSpec {
    SignalSpec::with_constant_envelopes(n_samples, &reference_components(nu_max), nu_true)
        .expect("valid reference spec")
}
