//! Property tests across the model, likelihood, and theory layers.

use proptest::prelude::*;

use sinorder::likelihood::{
    decompose_k, k_double_star, k_star, likelihood_profile, log_likelihood, ql_estimate,
};
use sinorder::signal_model::{observe, synthesize};
use sinorder::theory::{abridged_error_exact, decision_stats};
use sinorder::{ComponentParams, DecisionStats, Envelope, Observation, SignalSpec};

const TAU: f64 = std::f64::consts::TAU;

fn arb_params() -> impl Strategy<Value = ComponentParams> {
    (-2.0..2.0f64, 0.0..TAU, 0.0..TAU)
        .prop_map(|(a, w, p)| ComponentParams::new(a, w, p).unwrap())
}

/// Envelopes with strictly positive magnitude so diagonal correlations stay
/// away from zero.
fn arb_envelope(n: usize) -> impl Strategy<Value = Envelope> {
    (
        prop::collection::vec(0.2..1.0f64, n),
        prop::collection::vec(-1.0..1.0f64, n),
    )
        .prop_map(|(amp, phase)| Envelope::new(amp, phase).unwrap())
}

proptest! {
    #[test]
    fn recomposition_equals_direct_sum(
        pi in arb_params(),
        pj in arb_params(),
        env_i in arb_envelope(48),
        env_j in arb_envelope(48),
    ) {
        let direct = k_double_star(&pi, &env_i, &pj, &env_j).unwrap();
        let rec = decompose_k(&pi, &env_i, &pj, &env_j)
            .unwrap()
            .recompose(pi.phase, pj.phase);
        prop_assert!((direct - rec).abs() <= 1e-9 * direct.abs().max(1.0));

        let direct_star = k_star(&pi, &pj, &env_i, &env_j).unwrap();
        prop_assert_eq!(direct, direct_star);
    }

    #[test]
    fn correlation_is_symmetric(
        pi in arb_params(),
        pj in arb_params(),
        env in arb_envelope(32),
    ) {
        let a = k_double_star(&pi, &env, &pj, &env).unwrap();
        let b = k_double_star(&pj, &env, &pi, &env).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn diagonal_correlation_positive(
        p in arb_params(),
        env in arb_envelope(32),
    ) {
        let k = k_double_star(&p, &env, &p, &env).unwrap();
        prop_assert!(k > 0.0);
    }

    #[test]
    fn rho_is_a_correlation(
        params in prop::collection::vec(arb_params(), 2..5),
        env in arb_envelope(24),
        nu0 in 1usize..3,
        sigma in 0.01..5.0f64,
    ) {
        prop_assume!(nu0 < params.len());
        let envs: Vec<Envelope> = (0..params.len()).map(|_| env.clone()).collect();
        let stats = decision_stats(&params, &params, &envs, sigma, nu0).unwrap();
        prop_assert!(stats.rho.abs() <= 1.0 + 1e-12, "rho = {}", stats.rho);
    }

    #[test]
    fn exact_probability_in_unit_interval(
        r in -6.0..6.0f64,
        q in -6.0..6.0f64,
        rho in -0.999..0.999f64,
    ) {
        let p = abridged_error_exact(&DecisionStats { r, q, rho }).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn exact_probability_monotone_in_margins(
        r in -3.0..3.0f64,
        q in -3.0..3.0f64,
        dr in 0.0..2.0f64,
        rho in -0.9..0.9f64,
    ) {
        let p0 = abridged_error_exact(&DecisionStats { r, q, rho }).unwrap();
        let p1 = abridged_error_exact(&DecisionStats { r: r + dr, q, rho }).unwrap();
        let p2 = abridged_error_exact(&DecisionStats { r, q: q + dr, rho }).unwrap();
        prop_assert!(p1 <= p0 + 1e-10);
        prop_assert!(p2 <= p0 + 1e-10);
    }

    #[test]
    fn synthesis_phase_wrap_invariance(
        p in arb_params(),
        k in -3i32..4,
    ) {
        let spec = SignalSpec::with_constant_envelopes(32, &[p], 1).unwrap();
        let shifted = ComponentParams::new(
            p.amplitude,
            p.frequency,
            p.phase + f64::from(k) * TAU,
        )
        .unwrap();
        let spec_shifted = SignalSpec::with_constant_envelopes(32, &[shifted], 1).unwrap();
        let a = synthesize(&spec, 1).unwrap();
        let b = synthesize(&spec_shifted, 1).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn observation_determinism(seed in any::<u64>(), sigma in 0.01..3.0f64) {
        let p = ComponentParams::new(0.7, 1.1, 0.4).unwrap();
        let spec = SignalSpec::with_constant_envelopes(16, &[p], 1).unwrap();
        let a = observe(&spec, sigma, seed).unwrap();
        let b = observe(&spec, sigma, seed).unwrap();
        prop_assert_eq!(a.samples(), b.samples());
    }

    #[test]
    fn incremental_profile_matches_direct(
        params in prop::collection::vec(arb_params(), 1..5),
        env in arb_envelope(24),
        seed in any::<u64>(),
    ) {
        let envs: Vec<Envelope> = (0..params.len()).map(|_| env.clone()).collect();
        let spec_components: Vec<_> = params.iter().map(|p| (*p, env.clone())).collect();
        let spec = SignalSpec::new(24, spec_components, 1).unwrap();
        let x = observe(&spec, 0.5, seed).unwrap();
        let profile = likelihood_profile(&x, &params, &envs).unwrap();
        for nu in 1..=params.len() {
            let direct = log_likelihood(&x, nu, &params, &envs).unwrap();
            let inc = profile.value(nu).unwrap();
            prop_assert!(
                (inc - direct).abs() <= 1e-10 * direct.abs().max(1.0),
                "nu={}, incremental {} vs direct {}", nu, inc, direct
            );
        }
    }

    #[test]
    fn estimate_invariant_under_unit_rescaling(
        params in prop::collection::vec(arb_params(), 2..5),
        env in arb_envelope(24),
        seed in any::<u64>(),
        c in 0.1..10.0f64,
    ) {
        let envs: Vec<Envelope> = (0..params.len()).map(|_| env.clone()).collect();
        let spec_components: Vec<_> = params.iter().map(|p| (*p, env.clone())).collect();
        let spec = SignalSpec::new(24, spec_components, 1).unwrap();
        let x = observe(&spec, 0.8, seed).unwrap();
        let nu_a = ql_estimate(&x, &params, &envs).unwrap();

        let scaled_x = Observation::new(
            x.samples().iter().map(|v| c * v).collect(),
            c * x.sigma(),
        ).unwrap();
        let scaled_params: Vec<_> = params
            .iter()
            .map(|p| ComponentParams::new(c * p.amplitude, p.frequency, p.phase).unwrap())
            .collect();
        let nu_b = ql_estimate(&scaled_x, &scaled_params, &envs).unwrap();
        prop_assert_eq!(nu_a, nu_b);
    }
}
