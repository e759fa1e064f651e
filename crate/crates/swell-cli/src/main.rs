//! Experiment CLI for the free-surface wave solver.
//!
//! Exit codes: 0 on success/pass, 2 when a check fails, 1 on errors.

use anyhow::Result;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use swell_cli::config::ExperimentConfig;
use swell_cli::studies::{self, Ladder};
use swell_cli::initial;
use swell_core::breaking::predict;
use swell_core::ops::ExtremumKind;

#[derive(Parser)]
#[command(
    name = "swell",
    about = "Pseudospectral runs, convergence studies, and wave-breaking diagnostics for a nonlocal shallow-water free-surface equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured initial data and persist the run.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Evaluate the breaking hypothesis and breaking-time bound.
    Predict {
        config: PathBuf,
        /// Which slope extremum to track.
        #[arg(long, default_value = "sup")]
        kind: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run a convergence ladder (spatial, temporal or mollifier).
    Convergence {
        config: PathBuf,
        #[arg(long)]
        ladder: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Check the third-order-form residual along a short run.
    Equivalence {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Verify the mollifier property suite at the configured grid.
    MollifierCheck {
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Breaking sweep over a list of amplitudes.
    Sweep {
        config: PathBuf,
        /// Comma-separated amplitudes, e.g. 0.15,0.9,1.05
        #[arg(long)]
        amplitudes: String,
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
}

fn load(config: &PathBuf, output_dir: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(config)?;
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

/// Returns whether the invoked check passed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate { config, output_dir } => {
            let cfg = load(&config, output_dir)?;
            let (record, dir) = studies::run_simulation(&cfg)?;
            let last = record.series.last().expect("non-empty series");
            println!(
                "run {} stop={} t={} rows={} H={} -> {}",
                cfg.id(),
                record.stop.as_str(),
                last.t,
                record.series.len(),
                last.energy,
                dir.display()
            );
            Ok(true)
        }
        Command::Predict {
            config,
            kind,
            output_dir,
        } => {
            let cfg = load(&config, output_dir)?;
            let requested = match kind.as_str() {
                "inf" => ExtremumKind::Inf,
                "sup" => ExtremumKind::Sup,
                other => anyhow::bail!("unknown extremum kind '{other}' (inf|sup)"),
            };
            let eta0 = initial::make_initial_data(&cfg.initial, cfg.grid)?;
            let main = predict(&eta0, requested).map_err(|e| anyhow::anyhow!("{e}"))?;
            let other = predict(
                &eta0,
                match requested {
                    ExtremumKind::Inf => ExtremumKind::Sup,
                    ExtremumKind::Sup => ExtremumKind::Inf,
                },
            )
            .map_err(|e| anyhow::anyhow!("{e}"))?;
            let text = format!(
                "{}# literal check with the other extremum kind\n{}{}",
                studies::prediction_text(&main),
                studies::prediction_text(&other),
                studies::family_text()
            );
            print!("{text}");
            let dir = cfg.output_dir.join(format!("{}_predict", cfg.id()));
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("prediction.txt"), text)?;
            Ok(true)
        }
        Command::Convergence {
            config,
            ladder,
            output_dir,
        } => {
            let cfg = load(&config, output_dir)?;
            let ladder = Ladder::parse(&ladder)?;
            let report = studies::convergence_study(&cfg, ladder)?;
            println!(
                "convergence {}: {} -> {}",
                ladder.as_str(),
                report.detail,
                if report.pass { "pass" } else { "fail" }
            );
            Ok(report.pass)
        }
        Command::Equivalence { config, output_dir } => {
            let cfg = load(&config, output_dir)?;
            let report = studies::equivalence_check(&cfg)?;
            let worst = report
                .residual_norms
                .iter()
                .cloned()
                .fold(0.0f64, f64::max);
            println!(
                "equivalence: {} checkpoints, max residual {worst:.3e} -> {}",
                report.times.len(),
                if report.pass { "pass" } else { "fail" }
            );
            Ok(report.pass)
        }
        Command::MollifierCheck { config, output_dir } => {
            let cfg = load(&config, output_dir)?;
            let report = studies::mollifier_check(&cfg)?;
            println!(
                "mollifier {:?} eps={}: ratio={:.3e} defect={:.3e} order={:.3} growth=({:.2},{:.2}) -> {}",
                report.variant,
                report.epsilon,
                report.linf_ratio - 1.0,
                report.commutation_defect,
                report.convergence_order,
                report.growth_exponents[0],
                report.growth_exponents[1],
                if report.all_pass() { "pass" } else { "fail" }
            );
            Ok(report.all_pass())
        }
        Command::Sweep {
            config,
            amplitudes,
            output_dir,
        } => {
            let cfg = load(&config, output_dir)?;
            let amps: Vec<f64> = if amplitudes.trim().is_empty() {
                Vec::new()
            } else {
                amplitudes
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| anyhow::anyhow!("bad amplitude '{s}'"))
                    })
                    .collect::<Result<_>>()?
            };
            if !amps.windows(2).all(|w| w[1] > w[0]) || amps.iter().any(|&a| a <= 0.0) {
                if !amps.is_empty() {
                    anyhow::bail!("amplitudes must be positive and strictly increasing");
                }
            }
            let report = studies::breaking_sweep(&cfg, &amps)?;
            print!("{}", report.table_csv());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
