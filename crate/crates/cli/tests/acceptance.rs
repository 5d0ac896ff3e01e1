//! Acceptance suite: end-to-end checks of the estimator, the closed-form
//! error probability, and their agreement, at desk scale (2e4 trials per SNR
//! point). Every check prints one `acceptance:` line with the measured
//! quantities; all tolerances are pinned here in code.

use std::sync::OnceLock;

use sinorder::likelihood::{decompose_k, k_double_star, k_star};
use sinorder::theory::{
    abridged_error_approx, abridged_error_exact, decision_stats, normal_cdf, DecisionStats,
};
use sinorder::{ComponentParams, Envelope};

use sinorder_cli::config::SnrSetting;
use sinorder_cli::preset::reference_preset;
use sinorder_cli::sweep::{sweep_error_probability, sweep_normalized, ErrorProbabilityRow, SweepVar};

// ---------------------------------------------------------------------------
// deterministic test RNG (SplitMix64)

struct TestRng(u64);

impl TestRng {
    fn new(seed: u64) -> Self {
        Self(seed)
    }

    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * 2f64.powi(-53)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }
}

// ---------------------------------------------------------------------------
// shared Monte Carlo curves

fn mc_curve(nu_true: usize, nu_max: usize, grid: &[f64]) -> Vec<ErrorProbabilityRow> {
    let mut cfg = reference_preset();
    cfg.signal.nu_true = nu_true;
    cfg.signal.nu_max = nu_max;
    cfg.run.snr_db = SnrSetting::Grid(grid.to_vec());
    sweep_error_probability(&cfg).expect("reference sweep must run")
}

/// nu_true = 2, nu_max = 3, SNR -15..=-6 dB, 2e4 trials per point.
fn adjacent_curve() -> &'static [ErrorProbabilityRow] {
    static CURVE: OnceLock<Vec<ErrorProbabilityRow>> = OnceLock::new();
    CURVE.get_or_init(|| mc_curve(2, 3, &(-15..=-6).map(f64::from).collect::<Vec<_>>()))
}

/// nu_true = 3, nu_max = 5, SNR -15..=-8 dB, 2e4 trials per point.
fn nonadjacent_curve() -> &'static [ErrorProbabilityRow] {
    static CURVE: OnceLock<Vec<ErrorProbabilityRow>> = OnceLock::new();
    CURVE.get_or_init(|| mc_curve(3, 5, &(-15..=-8).map(f64::from).collect::<Vec<_>>()))
}

// ---------------------------------------------------------------------------
// criteria

#[test]
fn acceptance_theory_matches_simulation_adjacent_case() {
    // With one spare hypothesis on each side the closed form is exact, so
    // simulation may deviate only by Monte Carlo noise: |p_mc - p_exact|
    // within 3 standard errors at >= 90% of the grid points.
    let rows = adjacent_curve();
    let mut agree = 0usize;
    for row in rows {
        let ok = (row.p_mc - row.p_exact).abs() <= 3.0 * row.std_err;
        if ok {
            agree += 1;
        }
        println!(
            "  z={:6.1} dB  p_mc={:<12.6e} p_exact={:<12.6e} 3se={:<10.3e} {}",
            row.snr_db,
            row.p_mc,
            row.p_exact,
            3.0 * row.std_err,
            if ok { "ok" } else { "MISS" }
        );
    }
    let needed = (0.9 * rows.len() as f64).ceil() as usize;
    let pass = agree >= needed;
    println!(
        "acceptance: theory vs simulation, nu_true=2 nu_max=3: {}/{} points within 3se (need {needed}) -> {}",
        agree,
        rows.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "{agree}/{} points agree, need {needed}", rows.len());
}

#[test]
fn acceptance_theory_lower_bounds_simulation_nonadjacent_case() {
    // With interior hypotheses on both sides the closed form only lower
    // bounds the error probability: p_mc + 3se >= p_exact at every point.
    let rows = nonadjacent_curve();
    for row in rows {
        assert!(
            row.p_mc + 3.0 * row.std_err >= row.p_exact,
            "z={} dB: p_mc={} + 3se={} below p_exact={}",
            row.snr_db,
            row.p_mc,
            3.0 * row.std_err,
            row.p_exact
        );
        assert!(
            row.p_mc >= row.p_exact - 3.0 * row.std_err,
            "bound violated at z={}",
            row.snr_db
        );
    }
    println!(
        "acceptance: lower bound, nu_true=3 nu_max=5: holds at all {} points -> PASS",
        rows.len()
    );
}

#[test]
fn acceptance_approximation_accuracy_within_validity_region() {
    // Thresholds calibrated against the quadrature oracle over the validity
    // region min(Q,R) > 3, |rho| < 0.9: the worst relative deviation of the
    // tail expansion is 28.3% as min -> 3 and 13.3% as min -> 5 (attained
    // near rho = -0.9 with R = Q), so the frozen gates are 0.30 and 0.15.
    const GATE_NEAR: f64 = 0.30; // min(Q,R) in (3, 5]
    const GATE_FAR: f64 = 0.15; // min(Q,R) > 5

    let mut rng = TestRng::new(0x5eed_0003);
    let mut worst_near = 0.0f64;
    let mut worst_far = 0.0f64;
    for _ in 0..1000 {
        let r = rng.range(3.0001, 8.0);
        let q = rng.range(3.0001, 8.0);
        let rho = rng.range(-0.8999, 0.8999);
        let stats = DecisionStats { r, q, rho };
        let exact = abridged_error_exact(&stats).unwrap();
        let approx = abridged_error_approx(&stats);
        let rel = (approx - exact).abs() / exact;
        let m = r.min(q);
        if m <= 5.0 {
            assert!(rel <= GATE_NEAR, "(r={r}, q={q}, rho={rho}): rel={rel}");
            worst_near = worst_near.max(rel);
        } else {
            assert!(rel <= GATE_FAR, "(r={r}, q={q}, rho={rho}): rel={rel}");
            worst_far = worst_far.max(rel);
        }
    }

    // relative error shrinks along rays of growing min(Q,R) at fixed rho
    for ray in 0..60 {
        let mut rng = TestRng::new(0xA17_0000 + ray);
        let r0 = rng.range(3.05, 4.0);
        let q0 = rng.range(3.05, 4.0);
        let rho = rng.range(-0.8999, 0.8999);
        let mut prev = f64::INFINITY;
        for step in 0..6 {
            let s = 0.5 * step as f64;
            let stats = DecisionStats {
                r: r0 + s,
                q: q0 + s,
                rho,
            };
            let exact = abridged_error_exact(&stats).unwrap();
            let rel = (abridged_error_approx(&stats) - exact).abs() / exact;
            assert!(
                rel <= prev * 1.001 + 1e-10,
                "ray {ray} (rho={rho}): rel grew {prev} -> {rel} at step {step}"
            );
            prev = rel;
        }
    }
    println!(
        "acceptance: tail approximation: worst rel {:.4} in (3,5] (gate {GATE_NEAR}), {:.4} above 5 (gate {GATE_FAR}), 60 rays monotone -> PASS",
        worst_near, worst_far
    );
}

#[test]
fn acceptance_decomposition_equivalence() {
    // difference/sum-frequency recomposition equals the direct correlation
    // sums to 1e-9 relative over randomized parameters and envelopes
    let mut rng = TestRng::new(0x5eed_0004);
    let mut worst = 0.0f64;
    for draw in 0..1000 {
        let n = 16 + (rng.next_u64() % 49) as usize;
        let (env_i, env_j) = if draw % 2 == 0 {
            (Envelope::constant(n), Envelope::constant(n))
        } else {
            let make = |rng: &mut TestRng| {
                Envelope::new(
                    (0..n).map(|_| rng.range(0.2, 1.2)).collect(),
                    (0..n).map(|_| rng.range(-1.0, 1.0)).collect(),
                )
                .unwrap()
            };
            (make(&mut rng), make(&mut rng))
        };
        let tau = std::f64::consts::TAU;
        let pi = ComponentParams::new(rng.range(-2.0, 2.0), rng.range(0.0, tau), rng.range(0.0, tau))
            .unwrap();
        let pj = ComponentParams::new(rng.range(-2.0, 2.0), rng.range(0.0, tau), rng.range(0.0, tau))
            .unwrap();

        let direct = k_double_star(&pi, &env_i, &pj, &env_j).unwrap();
        let rec = decompose_k(&pi, &env_i, &pj, &env_j)
            .unwrap()
            .recompose(pi.phase, pj.phase);
        let rel = (direct - rec).abs() / direct.abs().max(1.0);
        assert!(rel <= 1e-9, "draw {draw}: direct {direct} vs recomposed {rec}");
        worst = worst.max(rel);

        let star = k_star(&pi, &pj, &env_i, &env_j).unwrap();
        assert_eq!(star, direct);
    }
    println!("acceptance: decomposition equivalence: worst rel {worst:.3e} over 1000 draws (gate 1e-9) -> PASS");
}

#[test]
fn acceptance_correlation_bound() {
    // the noise-projection correlation from the sigma-free form respects
    // |rho| <= 1 over randomized configurations
    let mut rng = TestRng::new(0x5eed_0005);
    let mut worst = 0.0f64;
    for draw in 0..10_000 {
        let n = 8 + (rng.next_u64() % 57) as usize;
        let n_comp = 2 + (rng.next_u64() % 4) as usize;
        let tau = std::f64::consts::TAU;
        let params: Vec<ComponentParams> = (0..n_comp)
            .map(|_| {
                ComponentParams::new(
                    rng.range(0.1, 2.0),
                    rng.range(0.0, tau),
                    rng.range(0.0, tau),
                )
                .unwrap()
            })
            .collect();
        let envelopes: Vec<Envelope> = (0..n_comp)
            .map(|_| {
                if draw % 2 == 0 {
                    Envelope::constant(n)
                } else {
                    Envelope::new(
                        (0..n).map(|_| rng.range(0.2, 1.2)).collect(),
                        (0..n).map(|_| rng.range(-1.0, 1.0)).collect(),
                    )
                    .unwrap()
                }
            })
            .collect();
        let nu0 = 1 + (rng.next_u64() as usize) % (n_comp - 1);
        let sigma = rng.range(0.05, 3.0);
        let stats = decision_stats(&params, &params, &envelopes, sigma, nu0).unwrap();
        assert!(
            stats.rho.abs() <= 1.0 + 1e-12,
            "draw {draw}: rho = {}",
            stats.rho
        );
        worst = worst.max(stats.rho.abs());
    }
    println!("acceptance: correlation bound: max |rho| = {worst:.12} over 10000 configurations (gate 1 + 1e-12) -> PASS");
}

#[test]
fn acceptance_consistency_trend() {
    // the exact probability decreases monotonically along the SNR grid and
    // the empirical rate at the top of the grid is below 1e-3
    let rows = adjacent_curve();
    for pair in rows.windows(2) {
        assert!(
            pair[1].p_exact <= pair[0].p_exact,
            "p_exact not monotone: {} dB -> {} dB",
            pair[0].snr_db,
            pair[1].snr_db
        );
    }
    let last = rows.last().unwrap();
    assert!(
        last.p_mc < 1e-3,
        "p_mc at {} dB is {}, expected < 1e-3",
        last.snr_db,
        last.p_mc
    );
    println!(
        "acceptance: consistency trend: p_exact monotone over {} points, top-SNR p_mc = {:.2e} (gate 1e-3) -> PASS",
        rows.len(),
        last.p_mc
    );
}

#[test]
fn acceptance_frequency_error_asymmetry() {
    // with delta_a = 0.16 and delta_phi = 0.4, positive and negative relative
    // frequency errors of equal size must produce different probabilities
    let mut cfg = reference_preset();
    cfg.run.snr_db = SnrSetting::Fixed(-11.0);
    cfg.errors.delta_a = 0.16;
    cfg.errors.delta_phi = 0.4;
    cfg.errors.delta_omega = 0.0;
    let grid: Vec<f64> = [0.05, 0.1, 0.15, 0.2]
        .iter()
        .flat_map(|&v| [v, -v])
        .collect();
    let rows = sweep_normalized(&cfg, SweepVar::DeltaOmega, &grid).unwrap();
    let mut max_gap = 0.0f64;
    for pair in rows.chunks(2) {
        max_gap = max_gap.max((pair[0].p_a - pair[1].p_a).abs());
    }
    assert!(max_gap > 1e-6, "largest sign asymmetry {max_gap}");
    println!(
        "acceptance: frequency-error asymmetry: max |p(+dw) - p(-dw)| = {max_gap:.3e} (gate 1e-6) -> PASS"
    );
}

#[test]
fn acceptance_numerical_kernels() {
    // normal CDF against a 50-digit reference table
    let table = include_str!("data/normal_cdf_reference.csv");
    let mut checked = 0usize;
    let mut worst_cdf = 0.0f64;
    for line in table.lines().skip(1) {
        let (xs, ps) = line.split_once(',').expect("two columns");
        let x: f64 = xs.parse().unwrap();
        let reference: f64 = ps.parse().unwrap();
        let err = (normal_cdf(x) - reference).abs();
        assert!(err <= 1e-12, "x={x}: |err| = {err}");
        worst_cdf = worst_cdf.max(err);
        checked += 1;
    }
    assert_eq!(checked, 1000);

    // exact quadrature against 2-D brute-force rectangle integration
    let mut rng = TestRng::new(0x5eed_0008);
    let mut worst_bvn = 0.0f64;
    for _ in 0..50 {
        let r = rng.range(-1.0, 4.0);
        let q = rng.range(-1.0, 4.0);
        let rho = rng.range(-0.9, 0.9);
        let exact = abridged_error_exact(&DecisionStats { r, q, rho }).unwrap();
        let brute = brute_force_probability(r, q, rho, 0.005);
        let err = (exact - brute).abs();
        assert!(err <= 1e-6, "(r={r}, q={q}, rho={rho}): |err| = {err}");
        worst_bvn = worst_bvn.max(err);
    }
    println!(
        "acceptance: kernels: CDF worst |err| {worst_cdf:.2e}/1e-12 on 1000 points; quadrature vs grid worst |err| {worst_bvn:.2e}/1e-6 on 50 triples -> PASS"
    );
}

/// Midpoint-rule integration of the bivariate normal density over
/// `{x > -r, y < q}`, truncated at +-8.5 sigma.
fn brute_force_probability(r: f64, q: f64, rho: f64, h: f64) -> f64 {
    let x_lo = (-r).max(-8.5);
    let x_hi = 8.5;
    let y_lo = -8.5;
    let y_hi = q.min(8.5);
    if x_lo >= x_hi || y_lo >= y_hi {
        return 1.0;
    }
    let nx = ((x_hi - x_lo) / h).ceil() as usize;
    let ny = ((y_hi - y_lo) / h).ceil() as usize;
    let hx = (x_hi - x_lo) / nx as f64;
    let hy = (y_hi - y_lo) / ny as f64;
    let s2 = 1.0 - rho * rho;
    let inv_sqrt_tau = 0.398_942_280_401_432_7;
    let mut integral = 0.0;
    for i in 0..nx {
        let x = x_lo + (i as f64 + 0.5) * hx;
        let fx = (-0.5 * x * x).exp() * inv_sqrt_tau;
        let mut inner = 0.0;
        for j in 0..ny {
            let y = y_lo + (j as f64 + 0.5) * hy;
            let z = (y - rho * x) / s2.sqrt();
            inner += (-0.5 * z * z).exp();
        }
        integral += fx * inner * inv_sqrt_tau / s2.sqrt() * hy * hx;
    }
    1.0 - integral
}

#[test]
fn acceptance_qualitative_shapes() {
    // figure-level numbers are not tabulated anywhere, so the curve-shape
    // checks stand in: self-normalization at zero error, and an error curve
    // that decreases with SNR up to Monte Carlo noise
    let mut cfg = reference_preset();
    cfg.run.snr_db = SnrSetting::Fixed(-11.0);
    let rows = sweep_normalized(&cfg, SweepVar::DeltaA, &[-0.2, 0.0, 0.2]).unwrap();
    assert_eq!(rows[1].p_a_normalized, 1.0);

    let curve = adjacent_curve();
    for pair in curve.windows(2) {
        assert!(
            pair[1].p_mc <= pair[0].p_mc + 3.0 * (pair[0].std_err + pair[1].std_err),
            "empirical curve rises beyond noise between {} and {} dB",
            pair[0].snr_db,
            pair[1].snr_db
        );
    }
    println!(
        "acceptance: qualitative shapes: unit self-normalization and decreasing empirical curve over {} points -> PASS",
        curve.len()
    );
}
