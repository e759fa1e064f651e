//! Explicit RK4 time stepping with CFL step control, stop detection, and
//! trajectory recording.

use crate::dynamics::{coeffs, rhs_by_variant, RhsVariant};
use crate::error::{CoreError, Result};
use crate::grid::{GridSpec, RealField};
use crate::ops::{derivative, energy, extremum_slope_near, sobolev_norm, ExtremumKind};

/// Instantaneous solver state.
#[derive(Debug, Clone)]
pub struct State {
    pub t: f64,
    pub eta: RealField,
}

/// Time-integration setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub t_end: f64,
    pub dt_init: f64,
    /// CFL number against the transport speed estimate `1 + (7/2)‖η‖_∞`.
    pub cfl: f64,
    /// Stop once `‖∂ₓη‖_∞` exceeds this; the blow-up monitor threshold.
    pub slope_stop: f64,
    /// Stop once the relative energy drift exceeds this; a resolved run
    /// must conserve H, so drift past this signals resolution failure.
    pub energy_drift_stop: f64,
    pub record_every: usize,
    pub variant: RhsVariant,
    /// Sobolev index recorded in the series (the well-posedness index).
    pub sobolev_s: f64,
}

impl SolverConfig {
    pub fn new(t_end: f64, dt_init: f64) -> Self {
        Self {
            t_end,
            dt_init,
            cfl: 0.3,
            slope_stop: 1e3,
            energy_drift_stop: 1e-4,
            record_every: 1,
            variant: RhsVariant::exact(),
            sobolev_s: 1.75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("t_end", self.t_end),
            ("dt_init", self.dt_init),
            ("cfl", self.cfl),
            ("slope_stop", self.slope_stop),
            ("energy_drift_stop", self.energy_drift_stop),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) && !(name == "cfl" && v.is_infinite() && v > 0.0) {
                return Err(CoreError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.dt_init > self.t_end {
            return Err(CoreError::InvalidConfig(format!(
                "dt_init = {} exceeds t_end = {}",
                self.dt_init, self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(CoreError::InvalidConfig("record_every must be >= 1".into()));
        }
        if !(self.sobolev_s.is_finite() && self.sobolev_s >= 0.0) {
            return Err(CoreError::InvalidConfig(format!(
                "sobolev_s must be nonnegative, got {}",
                self.sobolev_s
            )));
        }
        self.variant.validate()
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ReachedTEnd,
    SlopeThreshold,
    EnergyDrift,
    NonFinite,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::ReachedTEnd => "reached_t_end",
            StopReason::SlopeThreshold => "slope_threshold",
            StopReason::EnergyDrift => "energy_drift",
            StopReason::NonFinite => "nonfinite",
        }
    }
}

/// One recorded diagnostics row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    /// Conserved energy H(η).
    pub energy: f64,
    /// ‖η‖_{H^s} at the configured index.
    pub hs_norm: f64,
    pub linf_slope: f64,
    pub inf_slope: f64,
    pub sup_slope: f64,
    pub xi_inf: f64,
    pub xi_sup: f64,
    /// Running trapezoidal `∫₀ᵗ ‖∂ₓη‖_∞ dτ`, accumulated every step.
    pub slope_integral: f64,
}

/// Recorded trajectory of one run: diagnostics rows plus the field
/// snapshot at each recorded time.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub grid: GridSpec,
    pub t_end: f64,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<RealField>,
    pub stop: StopReason,
}

impl RunRecord {
    pub fn times(&self) -> Vec<f64> {
        self.series.iter().map(|r| r.t).collect()
    }

    pub fn final_time(&self) -> f64 {
        self.series.last().map(|r| r.t).unwrap_or(0.0)
    }
}

/// Classical four-stage Runge–Kutta update on the configured right-hand
/// side.
pub fn rk4_step(state: &State, dt: f64, variant: &RhsVariant) -> Result<State> {
    let eta = &state.eta;
    let k1 = rhs_by_variant(eta, variant)?;
    let k2 = rhs_by_variant(&eta.add_scaled(0.5 * dt, &k1)?, variant)?;
    let k3 = rhs_by_variant(&eta.add_scaled(0.5 * dt, &k2)?, variant)?;
    let k4 = rhs_by_variant(&eta.add_scaled(dt, &k3)?, variant)?;
    let mut out = eta.add_scaled(dt / 6.0, &k1)?;
    out = out.add_scaled(dt / 3.0, &k2)?;
    out = out.add_scaled(dt / 3.0, &k3)?;
    out = out.add_scaled(dt / 6.0, &k4)?;
    Ok(State {
        t: state.t + dt,
        eta: out,
    })
}

/// CFL step size from the transport speed estimate, capped by `dt_init`
/// and so the final step lands exactly on `t_end`.
pub fn choose_dt(state: &State, config: &SolverConfig) -> f64 {
    let dx = state.eta.grid().dx();
    let speed = 1.0 + coeffs::TRANSPORT * state.eta.max_abs();
    let mut dt = config.dt_init.min(config.cfl * dx / speed);
    if state.t + dt > config.t_end {
        dt = config.t_end - state.t;
    }
    dt
}

/// Integrate from `eta0` until `t_end` or a stop condition, recording
/// diagnostics every `record_every`-th step (plus the initial and final
/// states).
pub fn integrate(eta0: &RealField, config: &SolverConfig) -> Result<RunRecord> {
    config.validate()?;
    let grid = eta0.grid();
    let mut state = State {
        t: 0.0,
        eta: eta0.clone(),
    };
    let h0 = energy(eta0);

    let mut series: Vec<SeriesRow> = Vec::new();
    let mut snapshots: Vec<RealField> = Vec::new();
    let mut slope_integral = 0.0;
    let mut prev_linf = derivative(&state.eta, 1)?.max_abs();
    let mut prev_xi_inf: Option<f64> = None;
    let mut prev_xi_sup: Option<f64> = None;

    let record =
        |state: &State, slope_integral: f64, prev_inf: &mut Option<f64>, prev_sup: &mut Option<f64>, series: &mut Vec<SeriesRow>, snapshots: &mut Vec<RealField>| -> Result<()> {
            let slope = derivative(&state.eta, 1)?;
            let inf_ext = extremum_slope_near(&state.eta, ExtremumKind::Inf, *prev_inf)?;
            let sup_ext = extremum_slope_near(&state.eta, ExtremumKind::Sup, *prev_sup)?;
            *prev_inf = Some(inf_ext.location);
            *prev_sup = Some(sup_ext.location);
            series.push(SeriesRow {
                t: state.t,
                energy: energy(&state.eta),
                hs_norm: sobolev_norm(&state.eta, config.sobolev_s)?,
                linf_slope: slope.max_abs(),
                inf_slope: inf_ext.value,
                sup_slope: sup_ext.value,
                xi_inf: inf_ext.location,
                xi_sup: sup_ext.location,
                slope_integral,
            });
            snapshots.push(state.eta.clone());
            Ok(())
        };

    record(
        &state,
        slope_integral,
        &mut prev_xi_inf,
        &mut prev_xi_sup,
        &mut series,
        &mut snapshots,
    )?;

    let mut stop = StopReason::ReachedTEnd;
    let mut step: usize = 0;
    let t_tol = 1e-12 * config.t_end.max(1.0);
    while state.t < config.t_end - t_tol {
        let dt = choose_dt(&state, config);
        state = match rk4_step(&state, dt, &config.variant) {
            Ok(s) => s,
            Err(CoreError::NonFinite(_)) => {
                stop = StopReason::NonFinite;
                break;
            }
            Err(e) => return Err(e),
        };
        if !state.eta.samples().iter().all(|v| v.is_finite()) {
            stop = StopReason::NonFinite;
            break;
        }
        step += 1;

        let linf = derivative(&state.eta, 1)?.max_abs();
        slope_integral += 0.5 * dt * (prev_linf + linf);
        prev_linf = linf;

        let h = energy(&state.eta);
        let drifted = h0 > 0.0 && (h - h0).abs() / h0 > config.energy_drift_stop;
        let sloped = linf > config.slope_stop;
        let finished = state.t >= config.t_end - t_tol;
        let due = step % config.record_every == 0;

        if due || finished || sloped || drifted {
            record(
                &state,
                slope_integral,
                &mut prev_xi_inf,
                &mut prev_xi_sup,
                &mut series,
                &mut snapshots,
            )?;
        }
        if sloped {
            stop = StopReason::SlopeThreshold;
            break;
        }
        if drifted {
            stop = StopReason::EnergyDrift;
            break;
        }
    }
    if stop == StopReason::NonFinite && series.is_empty() {
        // unreachable: the initial state is always recorded
        return Err(CoreError::NonFinite("integrate"));
    }

    Ok(RunRecord {
        grid,
        t_end: config.t_end,
        series,
        snapshots,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_field_is_a_fixed_point() {
        let g = GridSpec::new(64, PI).unwrap();
        let z = RealField::zeros(g);
        let s = rk4_step(
            &State { t: 0.0, eta: z.clone() },
            0.1,
            &RhsVariant::exact(),
        )
        .unwrap();
        assert_eq!(s.eta.max_abs(), 0.0);
        assert_eq!(s.t, 0.1);

        let run = integrate(&z, &SolverConfig::new(1.0, 0.1)).unwrap();
        assert_eq!(run.stop, StopReason::ReachedTEnd);
        assert!(run.series.iter().all(|r| r.energy == 0.0
            && r.hs_norm == 0.0
            && r.linf_slope == 0.0
            && r.slope_integral == 0.0));
        assert!((run.final_time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_field_is_preserved() {
        let g = GridSpec::new(64, PI).unwrap();
        let c = RealField::constant(g, 0.8).unwrap();
        let s = rk4_step(
            &State { t: 0.0, eta: c.clone() },
            0.05,
            &RhsVariant::exact(),
        )
        .unwrap();
        let dev = s
            .eta
            .samples()
            .iter()
            .map(|v| (v - 0.8).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-13);
    }

    #[test]
    fn choose_dt_arithmetic() {
        let g = GridSpec::new(64, PI).unwrap();
        let dx = g.dx();
        let cfg = SolverConfig::new(10.0, 1.0);
        let zero = State {
            t: 0.0,
            eta: RealField::zeros(g),
        };
        assert!((choose_dt(&zero, &cfg) - (0.3 * dx).min(1.0)).abs() < 1e-15);

        let two = State {
            t: 0.0,
            eta: RealField::constant(g, 2.0).unwrap(),
        };
        assert!((choose_dt(&two, &cfg) - 0.3 * dx / 8.0).abs() < 1e-15);

        // cap to land exactly on t_end
        let near_end = State {
            t: 9.999,
            eta: RealField::zeros(g),
        };
        let dt = choose_dt(&near_end, &cfg);
        assert!((near_end.t + dt - 10.0).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::new(1.0, 2.0);
        assert!(cfg.validate().is_err()); // dt_init > t_end
        cfg.dt_init = 0.1;
        assert!(cfg.validate().is_ok());
        cfg.record_every = 0;
        assert!(cfg.validate().is_err());
        cfg.record_every = 1;
        cfg.cfl = -0.3;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn slope_threshold_stop_fires() {
        let g = GridSpec::new(256, 4.0 * PI).unwrap();
        let f = RealField::from_fn(g, |x| {
            1.05 * (x / 0.3).tanh() * (-(x / 3.0) * (x / 3.0)).exp()
        })
        .unwrap();
        let mut cfg = SolverConfig::new(0.5, 0.01);
        cfg.slope_stop = 4.0;
        cfg.energy_drift_stop = 0.5;
        let run = integrate(&f, &cfg).unwrap();
        assert_eq!(run.stop, StopReason::SlopeThreshold);
        assert!(run.final_time() < 0.5);
        assert!(run.series.last().unwrap().linf_slope > 4.0);
    }
}
