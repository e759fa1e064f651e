//! Quantitative wave-breaking machinery: the breaking-time bound and its
//! constants, extremal-slope dynamics along recorded runs, the Riccati
//! comparison, and Lagrangian characteristics.

use crate::dynamics::f_functional;
use crate::error::{CoreError, Result};
use crate::grid::{RealField, SpectralField};
use crate::integrator::RunRecord;
use crate::ops::{extremum_slope, extremum_slope_near, sobolev_norm, ExtremumKind};

/// Output of the breaking-time predictor.
#[derive(Debug, Clone, Copy)]
pub struct BreakingPrediction {
    pub h1_norm: f64,
    /// C₀ = 1/2 + 3‖η₀‖²_{H¹} + (3/16)‖η₀‖³_{H¹} + (3/32)‖η₀‖⁴_{H¹}.
    pub c0: f64,
    pub extremum_kind: ExtremumKind,
    /// Extremal initial slope M(0).
    pub m0: f64,
    /// Its location.
    pub x0: f64,
    /// M(0) > sqrt(2C₀/7).
    pub hypothesis_ok: bool,
    /// σ = 2C₀ / (7 M(0)²), in (0, 1) when the hypothesis holds.
    pub sigma: Option<f64>,
    /// T₀ = 2 / (7(1-σ)M(0)), the breaking-time bound.
    pub t0_bound: Option<f64>,
}

/// C₀ as a function of the H¹ norm of the initial data.
pub fn breaking_constant(h1_norm: f64) -> f64 {
    0.5 + 3.0 * h1_norm.powi(2) + (3.0 / 16.0) * h1_norm.powi(3) + (3.0 / 32.0) * h1_norm.powi(4)
}

/// Evaluate the breaking hypothesis and bound on initial data.
pub fn predict(eta0: &RealField, kind: ExtremumKind) -> Result<BreakingPrediction> {
    let h1_norm = sobolev_norm(eta0, 1.0)?;
    let c0 = breaking_constant(h1_norm);
    let ext = extremum_slope(eta0, kind)?;
    let m0 = ext.value;
    let threshold = (2.0 * c0 / 7.0).sqrt();
    let hypothesis_ok = m0 > threshold;
    let (sigma, t0_bound) = if hypothesis_ok {
        let sigma = 2.0 * c0 / (7.0 * m0 * m0);
        let t0 = 2.0 / (7.0 * (1.0 - sigma) * m0);
        (Some(sigma), Some(t0))
    } else {
        (None, None)
    };
    Ok(BreakingPrediction {
        h1_norm,
        c0,
        extremum_kind: kind,
        m0,
        x0: ext.location,
        hypothesis_ok,
        sigma,
        t0_bound,
    })
}

/// Lower envelope `M(t) >= M(0) / (1 - (7(1-σ)/2) t M(0))` from integrating
/// the Riccati inequality. Defined for `t` before the envelope's pole.
pub fn riccati_envelope(pred: &BreakingPrediction, t: f64) -> Result<f64> {
    if !pred.hypothesis_ok {
        return Err(CoreError::HypothesisNotSatisfied);
    }
    let sigma = pred.sigma.expect("hypothesis holds");
    let pole = 2.0 / (7.0 * (1.0 - sigma) * pred.m0);
    if !(0.0..pole).contains(&t) {
        return Err(CoreError::BeyondPole { t, pole });
    }
    Ok(pred.m0 / (1.0 - 3.5 * (1.0 - sigma) * t * pred.m0))
}

/// Time series of the tracked extremal slope along a recorded run.
#[derive(Debug, Clone)]
pub struct SlopeTrace {
    pub times: Vec<f64>,
    /// Extremal slope M(t).
    pub m: Vec<f64>,
    /// Its location ξ(t).
    pub xi: Vec<f64>,
    /// Forcing functional sampled at ξ(t).
    pub f_at_xi: Vec<f64>,
    /// (7/2)M² + f(ξ), the slope-ODE right-hand side.
    pub riccati_rhs: Vec<f64>,
}

/// Comparison of the measured dM/dt against the slope ODE and the Riccati
/// lower bound.
#[derive(Debug, Clone)]
pub struct SlopeDynamicsReport {
    pub c0: f64,
    /// Fraction of interior snapshots where
    /// |dM/dt - ((7/2)M² + f(ξ))| <= 1e-3 (1 + |dM/dt|).
    pub identity_pass_fraction: f64,
    pub identity_max_err: f64,
    pub identity_pass: bool,
    /// min over interior snapshots of dM/dt - (7/2)M² + C₀.
    pub riccati_margin_min: f64,
    pub riccati_pass: bool,
    /// min over snapshots of f(ξ) + C₀ (the forcing lower bound).
    pub forcing_margin_min: f64,
}

pub const IDENTITY_REL_TOL: f64 = 1e-3;
pub const IDENTITY_PASS_FRACTION: f64 = 0.95;
pub const RICCATI_MARGIN_TOL: f64 = 1e-3;

/// Rebuild the extremal-slope trace from a run's snapshots and check the
/// slope dynamics. Recording must be dense: the largest snapshot gap has
/// to be at most 1e-3 of the configured horizon.
pub fn slope_dynamics_check(
    run: &RunRecord,
    kind: ExtremumKind,
) -> Result<(SlopeTrace, SlopeDynamicsReport)> {
    if run.snapshots.len() < 3 {
        return Err(CoreError::TooSparse(format!(
            "need at least 3 snapshots, have {}",
            run.snapshots.len()
        )));
    }
    let times = run.times();
    let max_gap = times
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    if max_gap > 1e-3 * run.t_end * (1.0 + 1e-9) {
        return Err(CoreError::TooSparse(format!(
            "max snapshot gap {max_gap} exceeds 1e-3 * t_end = {}",
            1e-3 * run.t_end
        )));
    }

    let n = run.snapshots.len();
    let mut m = Vec::with_capacity(n);
    let mut xi = Vec::with_capacity(n);
    let mut f_at_xi = Vec::with_capacity(n);
    let mut prev: Option<f64> = None;
    for eta in &run.snapshots {
        let ext = extremum_slope_near(eta, kind, prev)?;
        prev = Some(ext.location);
        let f = f_functional(eta)?.to_spectral();
        m.push(ext.value);
        xi.push(ext.location);
        f_at_xi.push(f.evaluate_at(ext.location, 0));
    }
    let riccati_rhs: Vec<f64> = m
        .iter()
        .zip(&f_at_xi)
        .map(|(mi, fi)| 3.5 * mi * mi + fi)
        .collect();

    let c0 = breaking_constant(sobolev_norm(&run.snapshots[0], 1.0)?);
    let mut identity_max_err = 0.0f64;
    let mut pass_count = 0usize;
    let mut riccati_margin_min = f64::INFINITY;
    for i in 1..n - 1 {
        let dmdt = (m[i + 1] - m[i - 1]) / (times[i + 1] - times[i - 1]);
        let err = (dmdt - riccati_rhs[i]).abs();
        identity_max_err = identity_max_err.max(err);
        if err <= IDENTITY_REL_TOL * (1.0 + dmdt.abs()) {
            pass_count += 1;
        }
        riccati_margin_min = riccati_margin_min.min(dmdt - 3.5 * m[i] * m[i] + c0);
    }
    let interior = n - 2;
    let identity_pass_fraction = pass_count as f64 / interior as f64;
    let forcing_margin_min = f_at_xi
        .iter()
        .map(|f| f + c0)
        .fold(f64::INFINITY, f64::min);

    let report = SlopeDynamicsReport {
        c0,
        identity_pass_fraction,
        identity_max_err,
        identity_pass: identity_pass_fraction >= IDENTITY_PASS_FRACTION,
        riccati_margin_min,
        riccati_pass: riccati_margin_min >= -RICCATI_MARGIN_TOL * c0,
        forcing_margin_min,
    };
    Ok((
        SlopeTrace {
            times,
            m,
            xi,
            f_at_xi,
            riccati_rhs,
        },
        report,
    ))
}

/// Lagrangian trajectories `dq/dt = η(t, q)` seeded at `t = 0`, with the
/// flow Jacobian `q_x = exp(∫₀ᵗ η_x(τ, q(τ)) dτ)`.
#[derive(Debug, Clone)]
pub struct CharacteristicSet {
    pub times: Vec<f64>,
    pub seeds: Vec<f64>,
    /// `trajectories[s][i]` is q(t_i, seed_s), wrapped into the box.
    pub trajectories: Vec<Vec<f64>>,
    /// `jacobians[s][i]` is q_x(t_i, seed_s).
    pub jacobians: Vec<Vec<f64>>,
}

impl CharacteristicSet {
    pub fn min_jacobian(&self) -> f64 {
        self.jacobians
            .iter()
            .flatten()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Advance characteristics through a recorded run. Velocities come from
/// trigonometric interpolation of the snapshots, blended linearly between
/// snapshot times; each interval is one RK4 step per seed.
pub fn advance_characteristics(run: &RunRecord, seeds: &[f64]) -> Result<CharacteristicSet> {
    if run.snapshots.is_empty() {
        return Err(CoreError::InvalidField("run carries no snapshots".into()));
    }
    let grid = run.grid;
    let times = run.times();
    let spectra: Vec<SpectralField> = run.snapshots.iter().map(|f| f.to_spectral()).collect();

    let mut trajectories = Vec::with_capacity(seeds.len());
    let mut jacobians = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut q = grid.wrap(seed);
        let mut traj = vec![q];
        let mut jac = vec![1.0];
        let mut slope_integral = 0.0;
        let mut prev_slope = spectra[0].evaluate_at(q, 1);
        for i in 0..times.len() - 1 {
            let h = times[i + 1] - times[i];
            let blend = |theta: f64, p: f64| -> f64 {
                (1.0 - theta) * spectra[i].evaluate_at(p, 0) + theta * spectra[i + 1].evaluate_at(p, 0)
            };
            let k1 = blend(0.0, q);
            let k2 = blend(0.5, q + 0.5 * h * k1);
            let k3 = blend(0.5, q + 0.5 * h * k2);
            let k4 = blend(1.0, q + h * k3);
            q += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            q = grid.wrap(q);
            let slope_now = spectra[i + 1].evaluate_at(q, 1);
            slope_integral += 0.5 * h * (prev_slope + slope_now);
            prev_slope = slope_now;
            traj.push(q);
            jac.push(slope_integral.exp());
        }
        trajectories.push(traj);
        jacobians.push(jac);
    }
    Ok(CharacteristicSet {
        times,
        seeds: seeds.to_vec(),
        trajectories,
        jacobians,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::integrator::{integrate, SolverConfig, StopReason};
    use std::f64::consts::PI;

    #[test]
    fn predict_on_zero_data() {
        let g = GridSpec::new(64, PI).unwrap();
        let p = predict(&RealField::zeros(g), ExtremumKind::Sup).unwrap();
        assert_eq!(p.h1_norm, 0.0);
        assert!((p.c0 - 0.5).abs() < 1e-15);
        assert_eq!(p.m0, 0.0);
        assert!(!p.hypothesis_ok);
        assert!(p.sigma.is_none());
        assert!(p.t0_bound.is_none());
    }

    #[test]
    fn theorem_arithmetic_h1_2_m0_3() {
        // synthetic numbers: h1 = 2, M0 = 3 forced through the formulas
        let c0 = breaking_constant(2.0);
        assert!((c0 - 15.5).abs() < 1e-12);
        let threshold = (2.0 * c0 / 7.0).sqrt();
        assert!((threshold - (31.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert!(3.0 > threshold);
        let sigma = 2.0 * c0 / (7.0 * 9.0);
        assert!((sigma - 31.0 / 63.0).abs() < 1e-12);
        let t0 = 2.0 / (7.0 * (1.0 - sigma) * 3.0);
        assert!((t0 - 0.1875).abs() < 1e-12);

        let pred = BreakingPrediction {
            h1_norm: 2.0,
            c0,
            extremum_kind: ExtremumKind::Sup,
            m0: 3.0,
            x0: 0.0,
            hypothesis_ok: true,
            sigma: Some(sigma),
            t0_bound: Some(t0),
        };
        // envelope value at t = 0 and at half the bound
        assert!((riccati_envelope(&pred, 0.0).unwrap() - 3.0).abs() < 1e-14);
        assert!((riccati_envelope(&pred, 0.09375).unwrap() - 6.0).abs() < 1e-12);
        assert!(riccati_envelope(&pred, t0).is_err());
    }

    #[test]
    fn sigma_consistency_invariant() {
        let g = GridSpec::new(4096, 4.0 * PI).unwrap();
        let f = RealField::from_fn(g, |x| {
            1.05 * (x / 0.3).tanh() * (-(x / 3.0) * (x / 3.0)).exp()
        })
        .unwrap();
        let p = predict(&f, ExtremumKind::Sup).unwrap();
        assert!(p.hypothesis_ok);
        let sigma = p.sigma.unwrap();
        assert!(sigma > 0.0 && sigma < 1.0);
        assert!((sigma * p.m0 * p.m0 - 2.0 / 7.0 * p.c0).abs() < 1e-12 * p.c0);
        assert!(p.t0_bound.unwrap() > 0.0);
        // the literal inf-based hypothesis is unsatisfiable on decaying data
        let pinf = predict(&f, ExtremumKind::Inf).unwrap();
        assert!(pinf.m0 <= 0.0);
        assert!(!pinf.hypothesis_ok);
    }

    #[test]
    fn zero_run_slope_dynamics() {
        let g = GridSpec::new(64, PI).unwrap();
        let mut cfg = SolverConfig::new(0.1, 1e-4);
        cfg.record_every = 1;
        let run = integrate(&RealField::zeros(g), &cfg).unwrap();
        let (trace, report) = slope_dynamics_check(&run, ExtremumKind::Sup).unwrap();
        assert!(trace.m.iter().all(|&v| v == 0.0));
        assert!(trace.f_at_xi.iter().all(|&v| v == 0.0));
        assert!(report.identity_pass);
        assert!(report.riccati_pass);
        assert!((report.c0 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sparse_recording_rejected() {
        let g = GridSpec::new(64, PI).unwrap();
        let mut cfg = SolverConfig::new(1.0, 0.1);
        cfg.record_every = 1; // dt = 0.1 >> 1e-3 * t_end
        let f = RealField::from_fn(g, |x| 0.01 * x.sin()).unwrap();
        let run = integrate(&f, &cfg).unwrap();
        assert!(matches!(
            slope_dynamics_check(&run, ExtremumKind::Sup),
            Err(CoreError::TooSparse(_))
        ));
    }

    #[test]
    fn characteristics_zero_and_constant_runs() {
        let g = GridSpec::new(64, PI).unwrap();
        let mut cfg = SolverConfig::new(0.5, 0.01);
        cfg.record_every = 1;
        let run = integrate(&RealField::zeros(g), &cfg).unwrap();
        let seeds = [-2.0, 0.0, 1.3];
        let set = advance_characteristics(&run, &seeds).unwrap();
        for (s, traj) in seeds.iter().zip(&set.trajectories) {
            for q in traj {
                assert!((q - s).abs() < 1e-13);
            }
        }
        assert!((set.min_jacobian() - 1.0).abs() < 1e-13);

        let c = RealField::constant(g, 0.4).unwrap();
        let run = integrate(&c, &cfg).unwrap();
        assert_eq!(run.stop, StopReason::ReachedTEnd);
        let set = advance_characteristics(&run, &[0.0]).unwrap();
        let t_last = *set.times.last().unwrap();
        let q_last = set.trajectories[0].last().unwrap();
        assert!((q_last - g.wrap(0.4 * t_last)).abs() < 1e-10);
        assert!((set.min_jacobian() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn characteristics_wrap_out_of_box_seeds() {
        let g = GridSpec::new(64, 1.0) .unwrap();
        let mut cfg = SolverConfig::new(0.05, 0.01);
        cfg.record_every = 1;
        let run = integrate(&RealField::zeros(g), &cfg).unwrap();
        let set = advance_characteristics(&run, &[3.5]).unwrap();
        assert!((set.trajectories[0][0] - (-0.5)).abs() < 1e-13);
    }
}
