//! Theory/simulation sweeps and their CSV renderings.
//!
//! All CSVs carry a fixed header row, and numbers render in Rust's shortest
//! round-trip decimal form, so identical configurations produce byte-identical
//! files.

use std::fmt::Write as _;

use sinorder::montecarlo::{error_curve, sigma_for_snr};
use sinorder::signal_model::apply_errors;
use sinorder::theory::{
    abridged_error, decision_stats, worst_case_abridged, DecisionStats, ErrorBox,
    ParamErrorBounds,
};
use sinorder::ErrorSetting;

use crate::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Decision statistics and both error-probability forms at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub snr_db: f64,
    pub r: f64,
    pub q: f64,
    pub rho: f64,
    pub p_exact: f64,
    pub p_approx: f64,
    pub approx_valid: bool,
}

/// Simulation joined with theory at one SNR.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorProbabilityRow {
    pub snr_db: f64,
    pub p_mc: f64,
    pub std_err: f64,
    pub p_exact: f64,
    pub p_approx: f64,
    pub approx_valid: bool,
}

/// Exact probability at one swept error value, normalized by the zero-error
/// probability.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedRow {
    pub var: f64,
    pub p_a: f64,
    pub p_a_normalized: f64,
}

/// Worst case over a shared error box, with the zero-error baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct WorstCaseRow {
    pub p_max: f64,
    pub d_amp: f64,
    pub d_freq: f64,
    pub d_phase: f64,
    pub p_at_zero: f64,
}

/// Which shared error the normalized sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepVar {
    /// Relative amplitude error.
    DeltaA,
    /// Relative frequency error.
    DeltaOmega,
    /// Absolute phase error (radians).
    DeltaPhi,
}

fn stats_at(
    cfg: &ExperimentConfig,
    errors: &ErrorSetting,
    snr_db: f64,
) -> Result<DecisionStats> {
    let s = &cfg.signal;
    if s.nu_true + 1 > s.nu_max {
        return Err(Error::Usage(format!(
            "theory evaluation needs nu_max >= nu_true + 1, got nu_true = {}, nu_max = {}",
            s.nu_true, s.nu_max
        )));
    }
    let spec = cfg.signal_spec()?;
    let measured = apply_errors(
        spec.component_params(),
        &errors.resolve(spec.nu_max()).map_err(Error::Core)?,
    )
    .map_err(Error::Core)?;
    let sigma = sigma_for_snr(snr_db, cfg.a0(), cfg.snr_convention());
    Ok(decision_stats(
        spec.component_params(),
        &measured,
        spec.envelopes(),
        sigma,
        s.nu_true,
    )?)
}

/// One [`TheoryRow`] per configured SNR.
pub fn theory_rows(cfg: &ExperimentConfig) -> Result<Vec<TheoryRow>> {
    let errors = cfg.error_setting();
    cfg.run
        .snr_db
        .values()
        .into_iter()
        .map(|snr_db| {
            let stats = stats_at(cfg, &errors, snr_db)?;
            let ab = abridged_error(&stats)?;
            Ok(TheoryRow {
                snr_db,
                r: stats.r,
                q: stats.q,
                rho: stats.rho,
                p_exact: ab.p_exact,
                p_approx: ab.p_approx,
                approx_valid: ab.approx_valid,
            })
        })
        .collect()
}

/// Monte Carlo error curve joined with the theory evaluations at identical
/// settings, one row per configured SNR (empty grid allowed).
pub fn sweep_error_probability(cfg: &ExperimentConfig) -> Result<Vec<ErrorProbabilityRow>> {
    let grid = cfg.run.snr_db.values();
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let errors = cfg.error_setting();
    let trial_config = cfg.trial_config(grid[0])?;
    let mc = error_curve(&trial_config, &grid)?;
    mc.into_iter()
        .map(|(snr_db, est)| {
            let stats = stats_at(cfg, &errors, snr_db)?;
            let ab = abridged_error(&stats)?;
            Ok(ErrorProbabilityRow {
                snr_db,
                p_mc: est.p_err,
                std_err: est.std_err,
                p_exact: ab.p_exact,
                p_approx: ab.p_approx,
                approx_valid: ab.approx_valid,
            })
        })
        .collect()
}

fn single_snr(cfg: &ExperimentConfig) -> Result<f64> {
    let values = cfg.run.snr_db.values();
    if values.len() != 1 {
        return Err(Error::Usage(format!(
            "this command needs a single snr_db value, got {} entries",
            values.len()
        )));
    }
    Ok(values[0])
}

fn require_shared_errors(cfg: &ExperimentConfig) -> Result<(f64, f64, f64)> {
    if cfg.errors.is_per_component() {
        return Err(Error::Usage(
            "this command needs the shared delta_a/delta_omega/delta_phi error style".to_string(),
        ));
    }
    Ok((cfg.errors.delta_a, cfg.errors.delta_omega, cfg.errors.delta_phi))
}

/// Exact error probability as a function of one shared error, the others held
/// at their configured values, normalized by the value at zero.
pub fn sweep_normalized(
    cfg: &ExperimentConfig,
    var: SweepVar,
    grid: &[f64],
) -> Result<Vec<NormalizedRow>> {
    if grid.is_empty() {
        return Err(Error::Usage("sweep grid must not be empty".to_string()));
    }
    let snr_db = single_snr(cfg)?;
    let (da, dw, dp) = require_shared_errors(cfg)?;
    let with_var = |v: f64| match var {
        SweepVar::DeltaA => (v, dw, dp),
        SweepVar::DeltaOmega => (da, v, dp),
        SweepVar::DeltaPhi => (da, dw, v),
    };
    let eval = |v: f64| -> Result<f64> {
        let (a, w, p) = with_var(v);
        let errors = ErrorSetting::Shared(cfg.shared_errors_from(a, w, p));
        let stats = stats_at(cfg, &errors, snr_db)?;
        Ok(abridged_error(&stats)?.p_exact)
    };

    let p_zero = eval(0.0)?;
    if p_zero == 0.0 {
        return Err(Error::DegenerateNormalization(format!(
            "zero-error probability underflows to 0 at {snr_db} dB; nothing to normalize by"
        )));
    }
    grid.iter()
        .map(|&v| {
            let p = if v == 0.0 { p_zero } else { eval(v)? };
            Ok(NormalizedRow {
                var: v,
                p_a: p,
                p_a_normalized: p / p_zero,
            })
        })
        .collect()
}

/// Maximize the exact probability over a shared error box and report it next
/// to the zero-error baseline.
pub fn worst_case_report(cfg: &ExperimentConfig, bounds: ParamErrorBounds) -> Result<WorstCaseRow> {
    let snr_db = single_snr(cfg)?;
    let spec = cfg.signal_spec()?;
    if cfg.signal.nu_true + 1 > cfg.signal.nu_max {
        return Err(Error::Usage(format!(
            "worst-case evaluation needs nu_max >= nu_true + 1, got nu_true = {}, nu_max = {}",
            cfg.signal.nu_true, cfg.signal.nu_max
        )));
    }
    let sigma = sigma_for_snr(snr_db, cfg.a0(), cfg.snr_convention());
    let eb = ErrorBox::shared(bounds)?;
    let wc = worst_case_abridged(&spec, &eb, sigma, cfg.signal.nu_true)?;
    let zero = stats_at(
        cfg,
        &ErrorSetting::Shared(sinorder::ParamErrors::zero()),
        snr_db,
    )?;
    Ok(WorstCaseRow {
        p_max: wc.p_max,
        d_amp: wc.errors[0].d_amp,
        d_freq: wc.errors[0].d_freq,
        d_phase: wc.errors[0].d_phase,
        p_at_zero: abridged_error(&zero)?.p_exact,
    })
}

/// Symmetric shared box spanning the configured error magnitudes.
pub fn config_error_box(cfg: &ExperimentConfig) -> Result<ParamErrorBounds> {
    let (da, dw, dp) = require_shared_errors(cfg)?;
    Ok(ParamErrorBounds::symmetric(
        da * cfg.a0(),
        dw * cfg.freq_step(),
        dp,
    ))
}

pub fn theory_csv(rows: &[TheoryRow]) -> String {
    let mut out = String::from("snr_db,r,q,rho,p_exact,p_approx,approx_valid\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.snr_db, r.r, r.q, r.rho, r.p_exact, r.p_approx, r.approx_valid
        );
    }
    out
}

pub fn error_probability_csv(rows: &[ErrorProbabilityRow]) -> String {
    let mut out = String::from("snr_db,p_mc,std_err,p_exact,p_approx,approx_valid\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.snr_db, r.p_mc, r.std_err, r.p_exact, r.p_approx, r.approx_valid
        );
    }
    out
}

pub fn normalized_csv(rows: &[NormalizedRow]) -> String {
    let mut out = String::from("var,p_a,p_a_normalized\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.var, r.p_a, r.p_a_normalized);
    }
    out
}

pub fn worst_case_csv(row: &WorstCaseRow) -> String {
    format!(
        "p_max,d_amp,d_freq,d_phase,p_at_zero\n{},{},{},{},{}\n",
        row.p_max, row.d_amp, row.d_freq, row.d_phase, row.p_at_zero
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preset::reference_preset;

    fn preset_at(snr_db: f64) -> ExperimentConfig {
        let mut cfg = reference_preset();
        cfg.run.snr_db = crate::config::SnrSetting::Fixed(snr_db);
        cfg
    }

    #[test]
    fn theory_rows_per_snr() {
        let mut cfg = reference_preset();
        cfg.run.snr_db = crate::config::SnrSetting::Grid(vec![-12.0, -11.0]);
        let rows = theory_rows(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].p_exact > rows[1].p_exact);
        assert!(rows[1].r > 0.0 && rows[1].q > 0.0);
        assert!(rows[1].rho.abs() < 0.1);
    }

    #[test]
    fn empty_grid_yields_header_only_csv() {
        let mut cfg = reference_preset();
        cfg.run.snr_db = crate::config::SnrSetting::Grid(vec![]);
        let rows = sweep_error_probability(&cfg).unwrap();
        assert!(rows.is_empty());
        assert_eq!(
            error_probability_csv(&rows),
            "snr_db,p_mc,std_err,p_exact,p_approx,approx_valid\n"
        );
    }

    #[test]
    fn simulation_sweep_is_deterministic() {
        let mut cfg = reference_preset();
        cfg.run.snr_db = crate::config::SnrSetting::Grid(vec![-11.0]);
        cfg.run.trials = 500;
        let a = error_probability_csv(&sweep_error_probability(&cfg).unwrap());
        let b = error_probability_csv(&sweep_error_probability(&cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn normalized_sweep_is_one_at_zero() {
        let cfg = preset_at(-11.0);
        let rows = sweep_normalized(&cfg, SweepVar::DeltaA, &[-0.1, 0.0, 0.1]).unwrap();
        assert_eq!(rows[1].p_a_normalized, 1.0);
        assert!(rows[0].p_a > 0.0 && rows[2].p_a > 0.0);
    }

    #[test]
    fn normalized_sweep_constant_when_grid_all_zero() {
        let cfg = preset_at(-11.0);
        let rows = sweep_normalized(&cfg, SweepVar::DeltaOmega, &[0.0, 0.0]).unwrap();
        assert!(rows.iter().all(|r| r.p_a_normalized == 1.0));
    }

    #[test]
    fn normalized_sweep_underflow_is_degenerate() {
        let cfg = preset_at(100.0);
        let err = sweep_normalized(&cfg, SweepVar::DeltaA, &[0.0]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn frequency_error_sign_matters() {
        let mut cfg = preset_at(-11.0);
        cfg.errors.delta_a = 0.16;
        cfg.errors.delta_phi = 0.4;
        cfg.errors.delta_omega = 0.0;
        let rows = sweep_normalized(&cfg, SweepVar::DeltaOmega, &[-0.1, 0.1]).unwrap();
        assert!(
            (rows[0].p_a - rows[1].p_a).abs() > 1e-6,
            "p(-) = {}, p(+) = {}",
            rows[0].p_a,
            rows[1].p_a
        );
    }

    #[test]
    fn worst_case_point_box_equals_zero_baseline() {
        let cfg = preset_at(-11.0);
        let row = worst_case_report(
            &cfg,
            ParamErrorBounds::point(sinorder::ParamErrors::zero()),
        )
        .unwrap();
        assert_eq!(row.p_max, row.p_at_zero);
        assert_eq!((row.d_amp, row.d_freq, row.d_phase), (0.0, 0.0, 0.0));
    }

    #[test]
    fn nested_boxes_are_monotone() {
        let cfg = preset_at(-11.0);
        let small = ParamErrorBounds::symmetric(0.05 * 0.4, 0.0, 0.05);
        let large = ParamErrorBounds::symmetric(0.25 * 0.4, 0.0, 0.1);
        let p_small = worst_case_report(&cfg, small).unwrap().p_max;
        let p_large = worst_case_report(&cfg, large).unwrap().p_max;
        assert!(p_small <= p_large + 1e-9, "{p_small} vs {p_large}");
    }

    #[test]
    fn reference_box_is_nondegenerate() {
        let cfg = preset_at(-11.0);
        let bounds = config_error_box(&cfg).unwrap();
        let row = worst_case_report(&cfg, bounds).unwrap();
        assert!(row.p_max > 0.0 && row.p_max < 1.0);
        assert!(row.p_max >= row.p_at_zero);
    }

    #[test]
    fn csv_headers_are_fixed() {
        assert!(theory_csv(&[]).starts_with("snr_db,r,q,rho,p_exact,p_approx,approx_valid\n"));
        assert!(normalized_csv(&[]).starts_with("var,p_a,p_a_normalized\n"));
        let row = WorstCaseRow {
            p_max: 0.5,
            d_amp: 0.1,
            d_freq: 0.0,
            d_phase: -0.1,
            p_at_zero: 0.25,
        };
        assert_eq!(
            worst_case_csv(&row),
            "p_max,d_amp,d_freq,d_phase,p_at_zero\n0.5,0.1,0,-0.1,0.25\n"
        );
    }

    #[test]
    fn theory_requires_headroom_above_nu_true() {
        let mut cfg = preset_at(-11.0);
        cfg.signal.nu_true = 3;
        cfg.signal.nu_max = 3;
        assert!(theory_rows(&cfg).is_err());
    }
}
