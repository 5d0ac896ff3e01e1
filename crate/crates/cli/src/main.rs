use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use sinorder::likelihood::ProfileEvaluator;
use sinorder::signal_model::apply_errors;

use sinorder_cli::config::{ExperimentConfig, SnrSetting};
use sinorder_cli::error::{Error, Result};
use sinorder_cli::preset::reference_preset;
use sinorder_cli::sweep::{
    config_error_box, error_probability_csv, normalized_csv, sweep_error_probability,
    sweep_normalized, theory_csv, theory_rows, worst_case_csv, worst_case_report, SweepVar,
};

/// Quasi-likelihood estimation of the number of sinusoids in noise, with the
/// matching theoretical error probability.
#[derive(Parser)]
#[command(name = "sinorder", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the number of components in a sample file.
    Estimate {
        /// Experiment configuration (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Sample file: one real per line, t = 1..n_samples.
        #[arg(long)]
        samples: PathBuf,
    },
    /// Print decision statistics and error probabilities per SNR.
    Theory {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured SNR list, e.g. "-14,-12,-10".
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        snr_db: Option<String>,
    },
    /// Monte Carlo error curve joined with theory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured trial count.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the configured base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured SNR list, e.g. "-14,-12,-10".
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        snr_db: Option<String>,
    },
    /// Normalized error probability as one shared error sweeps a grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Which shared error to vary.
        #[arg(long, value_enum)]
        var: SweepVar,
        /// Grid values: "v1,v2,..." or "lo:hi:count".
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Override the configured SNR (single value).
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        snr_db: Option<String>,
    },
    /// Worst-case error probability over the configured error box.
    Worstcase {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured SNR (single value).
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        snr_db: Option<String>,
    },
    /// Write the built-in reference configuration.
    Preset {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Estimate { config, samples } => {
            let cfg = ExperimentConfig::load(&config)?;
            let data = read_samples(&samples)?;
            if data.len() != cfg.signal.n_samples {
                return Err(Error::Usage(format!(
                    "{} holds {} samples but the config expects n_samples = {}",
                    samples.display(),
                    data.len(),
                    cfg.signal.n_samples
                )));
            }
            let spec = cfg.signal_spec()?;
            let errors = cfg.error_setting().resolve(spec.nu_max())?;
            let measured = apply_errors(spec.component_params(), &errors)?;
            let evaluator = ProfileEvaluator::new(&measured, spec.envelopes())?;
            let nu_hat = evaluator.estimate(&data)?;
            println!("{nu_hat}");
            Ok(())
        }
        Command::Theory {
            config,
            out,
            snr_db,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_snr_override(&mut cfg, snr_db.as_deref())?;
            let rows = theory_rows(&cfg)?;
            write_output(out.as_deref(), &theory_csv(&rows))
        }
        Command::Simulate {
            config,
            out,
            trials,
            seed,
            snr_db,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(n) = trials {
                if n == 0 {
                    return Err(Error::Usage("--trials must be at least 1".to_string()));
                }
                cfg.run.trials = n;
            }
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            apply_snr_override(&mut cfg, snr_db.as_deref())?;
            let rows = sweep_error_probability(&cfg)?;
            write_output(out.as_deref(), &error_probability_csv(&rows))
        }
        Command::Sweep {
            config,
            out,
            var,
            grid,
            snr_db,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_snr_override(&mut cfg, snr_db.as_deref())?;
            let grid = parse_grid(&grid)?;
            let rows = sweep_normalized(&cfg, var, &grid)?;
            write_output(out.as_deref(), &normalized_csv(&rows))
        }
        Command::Worstcase {
            config,
            out,
            snr_db,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            apply_snr_override(&mut cfg, snr_db.as_deref())?;
            let bounds = config_error_box(&cfg)?;
            let row = worst_case_report(&cfg, bounds)?;
            write_output(out.as_deref(), &worst_case_csv(&row))
        }
        Command::Preset { out } => {
            write_output(out.as_deref(), &reference_preset().to_toml_string())
        }
    }
}

fn apply_snr_override(cfg: &mut ExperimentConfig, list: Option<&str>) -> Result<()> {
    if let Some(text) = list {
        let values = parse_float_list(text)?;
        cfg.run.snr_db = SnrSetting::Grid(values);
    }
    Ok(())
}

fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Usage(format!("cannot parse {s:?} as a number")))
        })
        .collect()
}

/// Grid syntax: a comma list, or `lo:hi:count` for a uniform grid including
/// both endpoints.
fn parse_grid(text: &str) -> Result<Vec<f64>> {
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Usage(format!(
                "grid ranges use lo:hi:count, got {text:?}"
            )));
        }
        let lo: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("cannot parse {:?} as a number", parts[0])))?;
        let hi: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("cannot parse {:?} as a number", parts[1])))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("cannot parse {:?} as a count", parts[2])))?;
        if count < 2 {
            return Err(Error::Usage("grid count must be at least 2".to_string()));
        }
        Ok((0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect())
    } else {
        parse_float_list(text)
    }
}

/// Sample file: one real per line; blank lines are skipped.
fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let value: f64 = trimmed.parse().map_err(|_| {
            Error::Usage(format!(
                "{}:{}: cannot parse {trimmed:?} as a number",
                path.display(),
                idx + 1
            ))
        })?;
        out.push(value);
    }
    Ok(out)
}

fn write_output(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}
