//! Spectral differential operators, the Helmholtz inverse and its
//! quadrature oracle, Sobolev norms, energy, and extremal-slope extraction.

use crate::error::{CoreError, Result};
use crate::grid::RealField;
use num_complex::Complex64;

/// Spectral derivative: multiply coefficient `k` by `(iξ_k)^order`.
/// Odd orders zero the Nyquist mode so real fields stay real.
pub fn derivative(f: &RealField, order: u32) -> Result<RealField> {
    if !(1..=3).contains(&order) {
        return Err(CoreError::UnsupportedOrder(order));
    }
    let n = f.grid().n();
    let s = f.to_spectral().scaled_by(|idx, xi| {
        if order % 2 == 1 && idx == n / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, xi).powu(order)
        }
    });
    Ok(s.to_real())
}

/// `(1 - ∂ₓ²)^{-1} f`: coefficient `k` divided by `1 + ξ_k²`.
pub fn helmholtz_inverse(f: &RealField) -> RealField {
    f.to_spectral()
        .scaled_by(|_, xi| Complex64::new(1.0 / (1.0 + xi * xi), 0.0))
        .to_real()
}

/// Periodized Green kernel of `(1 - ∂ₓ²)^{-1}` on the `2L`-circle:
/// `g_P(x) = cosh(L - |x|) / (2 sinh L)` for `|x| <= L`.
pub fn periodized_green_kernel(x: f64, half_length: f64) -> f64 {
    let l = half_length;
    (l - x.abs()).cosh() / (2.0 * l.sinh())
}

/// Truncated image sum `Σ_{|m|<=m_max} ½ e^{-|x - 2Lm|}` of the line kernel;
/// used to validate the closed form above.
pub fn green_kernel_image_sum(x: f64, half_length: f64, m_max: i64) -> f64 {
    let period = 2.0 * half_length;
    (-m_max..=m_max)
        .map(|m| 0.5 * (-(x - period * m as f64).abs()).exp())
        .sum()
}

/// 8th-order central finite difference of periodic samples.
/// Used only for the quadrature corrections below, keeping this code path
/// independent of the transforms.
fn fd_derivative(samples: &[f64], dx: f64, order: u32) -> Vec<f64> {
    let w: [f64; 9] = match order {
        1 => [
            1.0 / 280.0,
            -4.0 / 105.0,
            1.0 / 5.0,
            -4.0 / 5.0,
            0.0,
            4.0 / 5.0,
            -1.0 / 5.0,
            4.0 / 105.0,
            -1.0 / 280.0,
        ],
        2 => [
            -1.0 / 560.0,
            8.0 / 315.0,
            -1.0 / 5.0,
            8.0 / 5.0,
            -205.0 / 72.0,
            8.0 / 5.0,
            -1.0 / 5.0,
            8.0 / 315.0,
            -1.0 / 560.0,
        ],
        _ => panic!("unsupported fd order"),
    };
    let n = samples.len() as i64;
    let scale = dx.powi(-(order as i32));
    (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for (s, wk) in (-4..=4).zip(w.iter()) {
                acc += wk * samples[(j + s).rem_euclid(n) as usize];
            }
            acc * scale
        })
        .collect()
}

/// Direct quadrature realization of `(1 - ∂ₓ²)^{-1} f`: trapezoidal
/// convolution with the periodized kernel, plus Euler–Maclaurin corrections
/// for the kernel's kink at zero displacement (which always falls on a
/// node). Without the corrections the trapezoid sum carries an O((L/n)²)
/// aliasing error; with the dx² and dx⁴ terms it serves as an independent
/// 1e-8-class oracle for the multiplier path.
pub fn green_kernel_convolution(f: &RealField) -> RealField {
    let grid = f.grid();
    let n = grid.n();
    let dx = grid.dx();
    let l = grid.half_length();
    // kernel at displacement m*dx, wrapped to [-L, L)
    let kernel: Vec<f64> = (0..n)
        .map(|m| periodized_green_kernel(grid.wrap(m as f64 * dx), l))
        .collect();
    let fs = f.samples();
    let f2 = fd_derivative(fs, dx, 2);
    // odd kernel derivatives jump by -1 across the kink; with
    // psi(y) = g_P(x_i - y) f(y) the Euler–Maclaurin correction reads
    // I = T + (B2/2!) dx² [psi'] + (B4/4!) dx⁴ [psi'''],
    // [psi'] = -f(x_i), [psi'''] = -(3 f''(x_i) + f(x_i)).
    let c2 = (1.0 / 6.0) / 2.0;
    let c4 = (-1.0 / 30.0) / 24.0;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                let m = (i + n - j) % n;
                acc += kernel[m] * fs[j];
            }
            let trap = acc * dx;
            trap + c2 * dx * dx * (-fs[i]) + c4 * dx.powi(4) * (-(3.0 * f2[i] + fs[i]))
        })
        .collect();
    RealField::new(grid, samples).expect("finite quadrature output")
}

/// Discrete Sobolev norm under the Parseval convention:
/// `‖f‖²_{H^s} = Σ_k (1 + ξ_k²)^s |c_k|² · 2L`, so `s = 0` reproduces
/// the L² norm `(∫ |f|² dx)^{1/2}`.
pub fn sobolev_norm(f: &RealField, s: f64) -> Result<f64> {
    if !(s.is_finite() && s >= 0.0) {
        return Err(CoreError::NegativeSobolevIndex(s));
    }
    let grid = f.grid();
    let spectral = f.to_spectral();
    let mut sum = 0.0;
    for (idx, c) in spectral.coefficients().iter().enumerate() {
        let xi = grid.wavenumber(idx);
        sum += (1.0 + xi * xi).powf(s) * c.norm_sqr();
    }
    Ok((sum * 2.0 * grid.half_length()).sqrt())
}

/// Conserved energy `H(η) = ½ ∫ (η² + η_x²) dx = ½ ‖η‖²_{H¹}`.
/// Deliberately the same code path as [`sobolev_norm`] at `s = 1`.
pub fn energy(f: &RealField) -> f64 {
    let h1 = sobolev_norm(f, 1.0).expect("s = 1 is valid");
    0.5 * h1 * h1
}

/// Which extremum of the slope field to track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Inf,
    Sup,
}

/// Extremal slope value and its refined location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeExtremum {
    /// Extremal value of `∂ₓf`.
    pub value: f64,
    /// Location `ξ` of the extremum.
    pub location: f64,
    /// Set when the slope field is (numerically) constant; the location is
    /// then the leftmost node.
    pub degenerate: bool,
}

/// Locate the extremum of `∂ₓf`: nodal scan, then Newton iteration on the
/// trigonometric interpolant solving `∂ₓ²f(ξ) = 0` (the critical point
/// where the slope extremum sits). Iterating is needed to reach the
/// `|∂ₓ²f(ξ)| <= 1e-6 ‖∂ₓ²f‖_∞` contract; a single step leaves O((dx/w)²)
/// residual curvature on working grids.
pub fn extremum_slope(f: &RealField, kind: ExtremumKind) -> Result<SlopeExtremum> {
    extremum_slope_near(f, kind, None)
}

/// Tie window on nodal slope values within which candidates are considered
/// equal extrema; the one nearest the previous location wins.
pub(crate) const EXTREMUM_TIE_WINDOW: f64 = 1e-9;

/// As [`extremum_slope`], preferring the candidate node nearest
/// `previous` when several nodal values tie within `1e-9`.
pub fn extremum_slope_near(
    f: &RealField,
    kind: ExtremumKind,
    previous: Option<f64>,
) -> Result<SlopeExtremum> {
    let grid = f.grid();
    let slope = derivative(f, 1)?;
    let sv = slope.samples();

    let best = match kind {
        ExtremumKind::Sup => sv.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        ExtremumKind::Inf => sv.iter().cloned().fold(f64::INFINITY, f64::min),
    };
    let spread = slope.max() - slope.min();
    if spread <= 1e-13 * (1.0 + slope.max_abs()) {
        return Ok(SlopeExtremum {
            value: sv[0],
            location: grid.node(0),
            degenerate: true,
        });
    }

    let mut node = None;
    let mut node_dist = f64::INFINITY;
    for (j, &v) in sv.iter().enumerate() {
        let is_candidate = match kind {
            ExtremumKind::Sup => best - v <= EXTREMUM_TIE_WINDOW,
            ExtremumKind::Inf => v - best <= EXTREMUM_TIE_WINDOW,
        };
        if !is_candidate {
            continue;
        }
        let dist = match previous {
            Some(p) => grid.wrap(grid.node(j) - p).abs(),
            None => j as f64, // deterministic: first (leftmost) candidate
        };
        if dist < node_dist {
            node_dist = dist;
            node = Some(j);
        }
    }
    let j0 = node.expect("at least one extremal node");

    // Newton on f''(xi) = 0 from the best node, clamped to one cell.
    let spectral = f.to_spectral();
    let dx = grid.dx();
    let mut xi = grid.node(j0);
    for _ in 0..6 {
        let fxx = spectral.evaluate_at(xi, 2);
        let fxxx = spectral.evaluate_at(xi, 3);
        if fxxx.abs() < 1e-300 {
            break;
        }
        let step = fxx / fxxx;
        if !step.is_finite() || step.abs() > dx {
            break;
        }
        xi -= step;
        if step.abs() < 1e-15 * (1.0 + xi.abs()) {
            break;
        }
    }
    // keep the refinement only if it did not wander off the nodal cell
    if grid.wrap(xi - grid.node(j0)).abs() > dx {
        xi = grid.node(j0);
    }
    let value = spectral.evaluate_at(xi, 1);
    let improved = match kind {
        ExtremumKind::Sup => value >= sv[j0] - EXTREMUM_TIE_WINDOW,
        ExtremumKind::Inf => value <= sv[j0] + EXTREMUM_TIE_WINDOW,
    };
    if improved {
        Ok(SlopeExtremum {
            value,
            location: grid.wrap(xi),
            degenerate: false,
        })
    } else {
        Ok(SlopeExtremum {
            value: sv[j0],
            location: grid.node(j0),
            degenerate: false,
        })
    }
}
