//! Study drivers: single runs, the three convergence ladders, the
//! third-order equivalence check, the mollifier property check, and the
//! breaking-amplitude sweep.

use crate::config::ExperimentConfig;
use crate::initial::make_initial_data;
use crate::persist::write_run;
use anyhow::{anyhow, Context, Result};
use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;
use swell_core::breaking::{predict, riccati_envelope, BreakingPrediction};
use swell_core::dynamics::{self, RhsVariant};
use swell_core::fit;
use swell_core::grid::{GridSpec, RealField};
use swell_core::integrator::{integrate, RunRecord, SolverConfig, StopReason};
use swell_core::mollifier::{
    verification_field, verify_mollifier_properties, MollifierPropertyReport, MollifierSpec,
    MollifierVariant,
};
use swell_core::ops::{self, ExtremumKind};

fn core(e: swell_core::CoreError) -> anyhow::Error {
    anyhow!("{e}")
}

/// Run the configured simulation and persist it. Returns the record and
/// the run directory.
pub fn run_simulation(config: &ExperimentConfig) -> Result<(RunRecord, PathBuf)> {
    let eta0 = make_initial_data(&config.initial, config.grid)?;
    let start = Instant::now();
    let record = integrate(&eta0, &config.solver).map_err(core)?;
    let wall = start.elapsed().as_secs_f64();
    let dir = write_run(config, &record, wall)?;
    Ok((record, dir))
}

fn max_abs_difference(a: &RealField, b: &RealField) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn l2_difference(a: &RealField, b: &RealField) -> f64 {
    let diff = a.add_scaled(-1.0, b).expect("same grid");
    ops::sobolev_norm(&diff, 0.0).expect("s = 0")
}

/// Fixed-step solver config: the CFL cap is disabled so dt ladders halve
/// cleanly.
fn fixed_dt_solver(base: &SolverConfig, dt: f64, variant: RhsVariant) -> SolverConfig {
    let mut s = base.clone();
    s.dt_init = dt;
    s.cfl = f64::INFINITY;
    s.record_every = usize::MAX / 2; // initial and final rows only
    s.variant = variant;
    s
}

fn final_state(eta0: &RealField, solver: &SolverConfig) -> Result<RealField> {
    let record = integrate(eta0, solver).map_err(core)?;
    if record.stop != StopReason::ReachedTEnd {
        anyhow::bail!(
            "ladder member stopped early ({}) at t = {}",
            record.stop.as_str(),
            record.final_time()
        );
    }
    Ok(record.snapshots.last().expect("recorded final state").clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Spatial,
    Temporal,
    Mollifier,
}

impl Ladder {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "spatial" => Self::Spatial,
            "temporal" => Self::Temporal,
            "mollifier" => Self::Mollifier,
            other => anyhow::bail!("unknown ladder '{other}' (spatial|temporal|mollifier)"),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Spatial => "spatial",
            Self::Temporal => "temporal",
            Self::Mollifier => "mollifier",
        }
    }
}

pub const TEMPORAL_ORDER_TARGET: f64 = 4.0;
pub const TEMPORAL_ORDER_SLACK: f64 = 0.3;
pub const SPATIAL_MIN_RATIO: f64 = 10.0;
pub const MOLLIFIER_EPSILONS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub ladder: Ladder,
    /// ladder parameter values (dt, n, or ε)
    pub parameters: Vec<f64>,
    /// one error column per tested variant (temporal/spatial: one column;
    /// mollifier: columns for the two mollified placements)
    pub errors: Vec<Vec<f64>>,
    pub fitted_orders: Vec<f64>,
    pub pass: bool,
    pub detail: String,
}

impl ConvergenceReport {
    pub fn table_csv(&self) -> String {
        let mut out = String::from("parameter");
        for i in 0..self.errors.len() {
            let _ = write!(out, ",error_{i}");
        }
        out.push('\n');
        for (row, p) in self.parameters.iter().enumerate() {
            let _ = write!(out, "{p}");
            for col in &self.errors {
                let _ = write!(out, ",{}", col[row]);
            }
            out.push('\n');
        }
        out
    }
}

/// Run the requested convergence ladder. Members run in parallel and are
/// reduced in input order.
pub fn convergence_study(config: &ExperimentConfig, ladder: Ladder) -> Result<ConvergenceReport> {
    let report = match ladder {
        Ladder::Temporal => temporal_ladder(config)?,
        Ladder::Spatial => spatial_ladder(config)?,
        Ladder::Mollifier => mollifier_ladder(config)?,
    };
    persist_convergence(config, &report)?;
    Ok(report)
}

fn temporal_ladder(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let eta0 = make_initial_data(&config.initial, config.grid)?;
    let dt0 = config.solver.dt_init;
    let dts = [dt0, dt0 / 2.0, dt0 / 4.0];
    let mut members: Vec<f64> = dts.to_vec();
    members.push(dt0 / 16.0);
    let finals: Vec<RealField> = members
        .par_iter()
        .map(|&dt| final_state(&eta0, &fixed_dt_solver(&config.solver, dt, RhsVariant::exact())))
        .collect::<Result<_>>()?;
    let reference = finals.last().expect("reference run");
    let errors: Vec<f64> = finals[..3]
        .iter()
        .map(|f| max_abs_difference(f, reference))
        .collect();
    let order = fit::log_log_slope(&dts, &errors);
    let pass = (order - TEMPORAL_ORDER_TARGET).abs() <= TEMPORAL_ORDER_SLACK;
    Ok(ConvergenceReport {
        ladder: Ladder::Temporal,
        parameters: dts.to_vec(),
        errors: vec![errors],
        fitted_orders: vec![order],
        pass,
        detail: format!("fitted temporal order {order:.3} (target 4.0 ± 0.3)"),
    })
}

fn spatial_ladder(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let n = config.grid.n();
    if n % 4 != 0 || n / 4 < GridSpec::MIN_POINTS {
        anyhow::bail!("spatial ladder needs grid.n divisible by 4 and >= 64");
    }
    let ns = [n / 4, n / 2, n];
    let dt = config.solver.dt_init;
    let mut members: Vec<usize> = ns.to_vec();
    members.push(2 * n);
    let finals: Vec<RealField> = members
        .par_iter()
        .map(|&nn| {
            let grid = GridSpec::new(nn, config.grid.half_length()).map_err(core)?;
            let eta0 = make_initial_data(&config.initial, grid)?;
            final_state(&eta0, &fixed_dt_solver(&config.solver, dt, RhsVariant::exact()))
        })
        .collect::<Result<_>>()?;
    let reference = finals.last().expect("reference run");
    let errors: Vec<f64> = finals[..3]
        .iter()
        .map(|f| {
            let stride = 2 * n / f.grid().n();
            let coarse: Vec<f64> = reference
                .samples()
                .iter()
                .step_by(stride)
                .cloned()
                .collect();
            f.samples()
                .iter()
                .zip(&coarse)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let ratios: Vec<f64> = errors.windows(2).map(|w| w[0] / w[1]).collect();
    let pass = ratios.iter().all(|&r| r >= SPATIAL_MIN_RATIO);
    let detail = format!(
        "errors {errors:?}, per-doubling ratios {ratios:?} (each must be >= {SPATIAL_MIN_RATIO})"
    );
    Ok(ConvergenceReport {
        ladder: Ladder::Spatial,
        parameters: ns.iter().map(|&v| v as f64).collect(),
        errors: vec![errors],
        fitted_orders: ratios,
        pass,
        detail,
    })
}

fn mollifier_ladder(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    let eta0 = make_initial_data(&config.initial, config.grid)?;
    // the approximate system does not conserve H exactly; do not let the
    // resolution guard misread the O(ε²) drift
    let mut base = config.solver.clone();
    base.energy_drift_stop = base.energy_drift_stop.max(1e-2);
    let realization = config
        .solver
        .variant
        .mollifier()
        .map(|m| m.variant())
        .unwrap_or(MollifierVariant::SpectralCutoff);

    let exact = final_state(&eta0, &fixed_dt_solver(&base, base.dt_init, RhsVariant::exact()))?;
    let mut errors = vec![Vec::new(), Vec::new()];
    for (col, make) in [
        RhsVariant::mollified_a as fn(MollifierSpec) -> RhsVariant,
        RhsVariant::mollified_b as fn(MollifierSpec) -> RhsVariant,
    ]
    .iter()
    .enumerate()
    {
        let finals: Vec<RealField> = MOLLIFIER_EPSILONS
            .par_iter()
            .map(|&eps| {
                let spec = MollifierSpec::new(eps, realization).map_err(core)?;
                final_state(&eta0, &fixed_dt_solver(&base, base.dt_init, make(spec)))
            })
            .collect::<Result<_>>()?;
        errors[col] = finals.iter().map(|f| l2_difference(f, &exact)).collect();
    }
    let order_a = fit::log_log_slope(&MOLLIFIER_EPSILONS, &errors[0]);
    let order_b = fit::log_log_slope(&MOLLIFIER_EPSILONS, &errors[1]);
    let strictly_decreasing =
        |e: &[f64]| e.windows(2).all(|w| w[1] < w[0]);
    let pass = strictly_decreasing(&errors[0])
        && strictly_decreasing(&errors[1])
        && order_a > 0.0
        && order_b > 0.0;
    let detail = format!(
        "L2 errors vs exact at T = {}: placement A {:?} (order {order_a:.2}), placement B {:?} (order {order_b:.2})",
        config.solver.t_end, errors[0], errors[1]
    );
    Ok(ConvergenceReport {
        ladder: Ladder::Mollifier,
        parameters: MOLLIFIER_EPSILONS.to_vec(),
        errors,
        fitted_orders: vec![order_a, order_b],
        pass,
        detail,
    })
}

fn persist_convergence(config: &ExperimentConfig, report: &ConvergenceReport) -> Result<()> {
    let dir = config
        .output_dir
        .join(format!("{}_convergence_{}", config.id(), report.ladder.as_str()));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("ladder.csv"), report.table_csv())?;
    let status = if report.pass { "pass" } else { "fail" };
    std::fs::write(
        dir.join("report.txt"),
        format!(
            "ladder={}\nstatus={status}\n{}\n",
            report.ladder.as_str(),
            report.detail
        ),
    )?;
    Ok(())
}

pub const EQUIVALENCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub times: Vec<f64>,
    pub residual_norms: Vec<f64>,
    pub tolerances: Vec<f64>,
    pub pass: bool,
}

/// Residual of the third-order form along a short run: near-zero residuals
/// certify that the integrated nonlocal form and the third-order form are
/// the same equation on this data.
pub fn equivalence_check(config: &ExperimentConfig) -> Result<EquivalenceReport> {
    let eta0 = make_initial_data(&config.initial, config.grid)?;
    let mut solver = config.solver.clone();
    // around ten checkpoints
    let dt_est = solver
        .dt_init
        .min(solver.cfl * config.grid.dx() / (1.0 + 3.5 * eta0.max_abs()));
    let steps = (solver.t_end / dt_est).ceil() as usize;
    solver.record_every = (steps / 10).max(1);
    let record = integrate(&eta0, &solver).map_err(core)?;

    let mut times = Vec::new();
    let mut residual_norms = Vec::new();
    let mut tolerances = Vec::new();
    let mut worst_profile: Option<(f64, RealField)> = None;
    for (row, snap) in record.series.iter().zip(&record.snapshots) {
        let res = dynamics::third_order_residual(snap).map_err(core)?;
        let eta_t = dynamics::rhs(snap).map_err(core)?;
        let norm = res.max_abs();
        let tol = EQUIVALENCE_TOL * (1.0 + eta_t.max_abs());
        if worst_profile
            .as_ref()
            .map(|(w, _)| norm / tol > *w)
            .unwrap_or(true)
        {
            worst_profile = Some((norm / tol, res.clone()));
        }
        times.push(row.t);
        residual_norms.push(norm);
        tolerances.push(tol);
    }
    let pass = residual_norms
        .iter()
        .zip(&tolerances)
        .all(|(r, t)| r <= t);

    let dir = config
        .output_dir
        .join(format!("{}_equivalence", config.id()));
    std::fs::create_dir_all(&dir)?;
    let mut table = String::from("t,residual_inf,tolerance\n");
    for ((t, r), tol) in times.iter().zip(&residual_norms).zip(&tolerances) {
        let _ = writeln!(table, "{t},{r},{tol}");
    }
    std::fs::write(dir.join("residuals.csv"), table)?;
    if let Some((_, profile)) = &worst_profile {
        let mut prof = String::from("x,residual\n");
        for (j, v) in profile.samples().iter().enumerate() {
            let _ = writeln!(prof, "{},{}", config.grid.node(j), v);
        }
        std::fs::write(dir.join("worst_residual_profile.csv"), prof)?;
    }
    std::fs::write(
        dir.join("report.txt"),
        format!(
            "status={}\nchecked_times={}\nmax_residual={}\n",
            if pass { "pass" } else { "fail" },
            times.len(),
            residual_norms.iter().cloned().fold(0.0, f64::max),
        ),
    )?;

    Ok(EquivalenceReport {
        times,
        residual_norms,
        tolerances,
        pass,
    })
}

/// Property suite for the configured mollifier. The measurement runs on
/// the built-in rough verification field at the configured grid: the
/// linear smoothing rate that the suite checks is sharp only on fields of
/// marginal smoothness, which none of the (smooth) initial-data families
/// provide.
pub fn mollifier_check(config: &ExperimentConfig) -> Result<MollifierPropertyReport> {
    let field = verification_field(config.grid);
    let spec = config
        .solver
        .variant
        .mollifier()
        .copied()
        .unwrap_or(MollifierSpec::spectral(0.4).map_err(core)?);
    let report = verify_mollifier_properties(&field, &spec).map_err(core)?;

    let dir = config.output_dir.join(format!("{}_mollifier", config.id()));
    std::fs::create_dir_all(&dir)?;
    let mut text = String::new();
    let _ = writeln!(text, "variant={:?}", report.variant);
    let _ = writeln!(text, "epsilon={}", report.epsilon);
    let _ = writeln!(text, "linf_ratio={} pass={}", report.linf_ratio, report.linf_pass);
    let _ = writeln!(
        text,
        "commutation_defect={} pass={}",
        report.commutation_defect, report.commutation_pass
    );
    let _ = writeln!(
        text,
        "convergence_order={} pass={}",
        report.convergence_order, report.convergence_pass
    );
    let _ = writeln!(
        text,
        "growth_exponents={},{} pass={},{}",
        report.growth_exponents[0],
        report.growth_exponents[1],
        report.growth_pass[0],
        report.growth_pass[1]
    );
    let _ = writeln!(text, "status={}", if report.all_pass() { "pass" } else { "fail" });
    std::fs::write(dir.join("report.txt"), text)?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub amplitude: f64,
    pub prediction_inf: Option<BreakingPrediction>,
    pub prediction_sup: Option<BreakingPrediction>,
    pub stop: Option<StopReason>,
    pub stop_time: f64,
    pub envelope_violations: usize,
    pub riccati_margin_min: f64,
    pub error: Option<String>,
}

pub const ENVELOPE_REL_TOL: f64 = 1e-3;

fn sweep_row(base: &ExperimentConfig, amplitude: f64) -> SweepRow {
    let mut row = SweepRow {
        amplitude,
        prediction_inf: None,
        prediction_sup: None,
        stop: None,
        stop_time: f64::NAN,
        envelope_violations: 0,
        riccati_margin_min: f64::NAN,
        error: None,
    };
    let mut spec = base.initial;
    spec.amplitude = amplitude;
    let eta0 = match make_initial_data(&spec, base.grid) {
        Ok(f) => f,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let pred_inf = predict(&eta0, ExtremumKind::Inf);
    let pred_sup = predict(&eta0, ExtremumKind::Sup);
    let (pred_inf, pred_sup) = match (pred_inf, pred_sup) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.prediction_inf = Some(pred_inf);
    row.prediction_sup = Some(pred_sup);

    let record = match integrate(&eta0, &base.solver) {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.stop = Some(record.stop);
    row.stop_time = record.final_time();

    // Riccati margin from the recorded sup-slope series
    let c0 = pred_sup.c0;
    let s = &record.series;
    let mut margin = f64::INFINITY;
    for i in 1..s.len().saturating_sub(1) {
        let dmdt = (s[i + 1].sup_slope - s[i - 1].sup_slope) / (s[i + 1].t - s[i - 1].t);
        margin = margin.min(dmdt - 3.5 * s[i].sup_slope * s[i].sup_slope + c0);
    }
    row.riccati_margin_min = margin;

    if pred_sup.hypothesis_ok {
        for r in s {
            match riccati_envelope(&pred_sup, r.t) {
                Ok(env) => {
                    if r.sup_slope < env * (1.0 - ENVELOPE_REL_TOL) {
                        row.envelope_violations += 1;
                    }
                }
                Err(_) => break, // at or past the envelope pole
            }
        }
    }
    row
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    pub fn table_csv(&self) -> String {
        let mut out = String::from(
            "amplitude,h1,C0,M0_inf,M0_sup,hypothesis_inf,hypothesis_sup,sigma,T0_bound,stop,stop_time,envelope_violations,riccati_margin_min,error\n",
        );
        for r in &self.rows {
            let (h1, c0) = r
                .prediction_sup
                .map(|p| (p.h1_norm, p.c0))
                .unwrap_or((f64::NAN, f64::NAN));
            let m0_inf = r.prediction_inf.map(|p| p.m0).unwrap_or(f64::NAN);
            let m0_sup = r.prediction_sup.map(|p| p.m0).unwrap_or(f64::NAN);
            let hyp_inf = r.prediction_inf.map(|p| p.hypothesis_ok).unwrap_or(false);
            let hyp_sup = r.prediction_sup.map(|p| p.hypothesis_ok).unwrap_or(false);
            let sigma = r
                .prediction_sup
                .and_then(|p| p.sigma)
                .map(|v| v.to_string())
                .unwrap_or_default();
            let t0 = r
                .prediction_sup
                .and_then(|p| p.t0_bound)
                .map(|v| v.to_string())
                .unwrap_or_default();
            let stop = r.stop.map(|s| s.as_str()).unwrap_or("");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.amplitude,
                h1,
                c0,
                m0_inf,
                m0_sup,
                hyp_inf,
                hyp_sup,
                sigma,
                t0,
                stop,
                r.stop_time,
                r.envelope_violations,
                r.riccati_margin_min,
                r.error.clone().unwrap_or_default()
            );
        }
        out
    }
}

/// Run the breaking sweep over the amplitude list. Member runs execute in
/// parallel; the table preserves input order. Individual failures land in
/// the row's error column and the sweep continues.
pub fn breaking_sweep(base: &ExperimentConfig, amplitudes: &[f64]) -> Result<SweepReport> {
    let rows: Vec<SweepRow> = amplitudes
        .par_iter()
        .map(|&a| sweep_row(base, a))
        .collect();
    let report = SweepReport { rows };
    let dir = base.output_dir.join(format!("{}_sweep", base.id()));
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("sweep.csv"), report.table_csv())?;
    Ok(report)
}

/// Text summary of one prediction, as printed by the CLI and stored next
/// to runs.
pub fn prediction_text(pred: &BreakingPrediction) -> String {
    let mut out = String::new();
    let kind = match pred.extremum_kind {
        ExtremumKind::Inf => "inf",
        ExtremumKind::Sup => "sup",
    };
    let _ = writeln!(out, "kind={kind}");
    let _ = writeln!(out, "h1_norm={}", pred.h1_norm);
    let _ = writeln!(out, "C0={}", pred.c0);
    let _ = writeln!(out, "M0={}", pred.m0);
    let _ = writeln!(out, "x0={}", pred.x0);
    let _ = writeln!(out, "hypothesis_ok={}", pred.hypothesis_ok);
    if let (Some(s), Some(t)) = (pred.sigma, pred.t0_bound) {
        let _ = writeln!(out, "sigma={s}");
        let _ = writeln!(out, "T0_bound={t}");
    }
    out
}

/// The q = 1/12 coefficient identities printed by `predict` for reference.
pub fn family_text() -> String {
    let fam = dynamics::FamilyCoefficients::specialized();
    let t = fam.induced_third_order();
    format!(
        "family.q={}\nfamily.alpha={}\nfamily.beta={}\nfamily.gamma={}\nfamily.delta={}\nfamily.mu_alpha={}\nfamily.mu_beta={}\nfamily.eps_mu_gamma={}\nfamily.eps_mu_delta={}\n",
        fam.q, fam.alpha, fam.beta, fam.gamma, fam.delta, t.mu_alpha, t.mu_beta, t.eps_mu_gamma, t.eps_mu_delta
    )
}
