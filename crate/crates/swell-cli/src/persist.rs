//! Run persistence: series.csv, per-snapshot CSVs, and a key=value
//! manifest carrying everything needed to re-derive reported numbers.
//! Floats are written in shortest round-trip form, so reloading is
//! bit-exact.

use crate::config::ExperimentConfig;
use anyhow::{anyhow, bail, Context, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use swell_core::dynamics::coeffs;
use swell_core::grid::RealField;
use swell_core::integrator::{RunRecord, SeriesRow, StopReason};

pub const SERIES_HEADER: &str =
    "t,H,Hs_norm,linf_slope,inf_slope,sup_slope,xi_inf,xi_sup,slope_integral";

pub fn series_csv(record: &RunRecord) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for r in &record.series {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.t,
            r.energy,
            r.hs_norm,
            r.linf_slope,
            r.inf_slope,
            r.sup_slope,
            r.xi_inf,
            r.xi_sup,
            r.slope_integral
        );
    }
    out
}

fn snapshot_csv(field: &RealField) -> String {
    let grid = field.grid();
    let mut out = String::from("x,eta\n");
    for (j, v) in field.samples().iter().enumerate() {
        let _ = writeln!(out, "{},{}", grid.node(j), v);
    }
    out
}

fn manifest(config: &ExperimentConfig, record: &RunRecord, wall_time: f64) -> String {
    let mut out = String::new();
    for line in config.canonical().lines() {
        let _ = writeln!(out, "config.{line}");
    }
    let _ = writeln!(out, "id={}", config.id());
    let _ = writeln!(out, "stop={}", record.stop.as_str());
    let _ = writeln!(out, "wall_time={wall_time}");
    let _ = writeln!(out, "final_time={}", record.final_time());
    let _ = writeln!(out, "rows={}", record.series.len());
    let _ = writeln!(out, "grid.dx={}", record.grid.dx());
    // the exact coefficient table behind every reported number
    let _ = writeln!(out, "coeff.bracket.linear={}", coeffs::LINEAR);
    let _ = writeln!(out, "coeff.bracket.quadratic={}", coeffs::QUADRATIC);
    let _ = writeln!(out, "coeff.bracket.slope_squared={}", coeffs::SLOPE_SQUARED);
    let _ = writeln!(out, "coeff.bracket.cubic={}", coeffs::CUBIC);
    let _ = writeln!(out, "coeff.bracket.quartic={}", coeffs::QUARTIC);
    let _ = writeln!(out, "coeff.transport={}", coeffs::TRANSPORT);
    let _ = writeln!(out, "threshold.slope_stop={}", config.solver.slope_stop);
    let _ = writeln!(
        out,
        "threshold.energy_drift_stop={}",
        config.solver.energy_drift_stop
    );
    out
}

/// Write a run into `<output_dir>/<id>/`, returning the run directory.
pub fn write_run(
    config: &ExperimentConfig,
    record: &RunRecord,
    wall_time: f64,
) -> Result<PathBuf> {
    let dir = config.output_dir.join(config.id());
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating run directory {}", dir.display()))?;
    std::fs::write(dir.join("series.csv"), series_csv(record))
        .with_context(|| format!("writing {}", dir.join("series.csv").display()))?;
    for (i, snap) in record.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i}.csv");
        std::fs::write(dir.join(&name), snapshot_csv(snap))
            .with_context(|| format!("writing {}", dir.join(&name).display()))?;
    }
    std::fs::write(dir.join("manifest.txt"), manifest(config, record, wall_time))
        .with_context(|| format!("writing {}", dir.join("manifest.txt").display()))?;
    Ok(dir)
}

fn parse_stop(s: &str) -> Result<StopReason> {
    Ok(match s {
        "reached_t_end" => StopReason::ReachedTEnd,
        "slope_threshold" => StopReason::SlopeThreshold,
        "energy_drift" => StopReason::EnergyDrift,
        "nonfinite" => StopReason::NonFinite,
        other => bail!("unknown stop reason '{other}'"),
    })
}

/// Reload a persisted run. Floats round-trip bitwise.
pub fn load_run(dir: &Path) -> Result<(ExperimentConfig, RunRecord, f64)> {
    let manifest_text = std::fs::read_to_string(dir.join("manifest.txt"))
        .with_context(|| format!("reading {}", dir.join("manifest.txt").display()))?;
    let mut config_lines = Vec::new();
    let mut stop = None;
    let mut wall_time = 0.0;
    let mut rows = 0usize;
    for line in manifest_text.lines() {
        if let Some(rest) = line.strip_prefix("config.") {
            config_lines.push(rest.to_string());
        } else if let Some(v) = line.strip_prefix("stop=") {
            stop = Some(parse_stop(v)?);
        } else if let Some(v) = line.strip_prefix("wall_time=") {
            wall_time = v.parse().context("manifest wall_time")?;
        } else if let Some(v) = line.strip_prefix("rows=") {
            rows = v.parse().context("manifest rows")?;
        }
    }
    let config = ExperimentConfig::parse(&(config_lines.join("\n") + "\n"))
        .context("rebuilding config from manifest")?;
    let stop = stop.ok_or_else(|| anyhow!("manifest carries no stop reason"))?;

    let series_text = std::fs::read_to_string(dir.join("series.csv"))
        .with_context(|| format!("reading {}", dir.join("series.csv").display()))?;
    let mut lines = series_text.lines();
    let header = lines.next().ok_or_else(|| anyhow!("empty series.csv"))?;
    if header != SERIES_HEADER {
        bail!("unexpected series.csv header '{header}'");
    }
    let mut series = Vec::new();
    for line in lines {
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.parse::<f64>().map_err(|e| anyhow!("series value: {e}")))
            .collect::<Result<_>>()?;
        if vals.len() != 9 {
            bail!("series row with {} columns", vals.len());
        }
        series.push(SeriesRow {
            t: vals[0],
            energy: vals[1],
            hs_norm: vals[2],
            linf_slope: vals[3],
            inf_slope: vals[4],
            sup_slope: vals[5],
            xi_inf: vals[6],
            xi_sup: vals[7],
            slope_integral: vals[8],
        });
    }
    if series.len() != rows {
        bail!("manifest declares {rows} rows, series.csv has {}", series.len());
    }

    let mut snapshots = Vec::with_capacity(series.len());
    for i in 0..series.len() {
        let path = dir.join(format!("snapshot_{i}.csv"));
        let text =
            std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let mut samples = Vec::with_capacity(config.grid.n());
        for (ln, line) in text.lines().enumerate() {
            if ln == 0 {
                if line != "x,eta" {
                    bail!("unexpected snapshot header '{line}'");
                }
                continue;
            }
            let (_, eta) = line
                .split_once(',')
                .ok_or_else(|| anyhow!("bad snapshot row '{line}'"))?;
            samples.push(eta.parse::<f64>().context("snapshot value")?);
        }
        snapshots.push(RealField::new(config.grid, samples).map_err(|e| anyhow!("{e}"))?);
    }

    let record = RunRecord {
        grid: config.grid,
        t_end: config.solver.t_end,
        series,
        snapshots,
        stop,
    };
    Ok((config, record, wall_time))
}
