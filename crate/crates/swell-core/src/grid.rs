//! Periodic grid and field types.
//!
//! The domain is the box `[-L, L)` with period `2L`, sampled at `n`
//! equispaced nodes `x_j = -L + j·dx`, `dx = 2L/n`. Spectral content lives
//! on physical wavenumbers `ξ_k = πk/L` in FFT index order
//! `k = 0, 1, …, n/2-1, -n/2, …, -1`, with mean-normalized coefficients.

use crate::error::{CoreError, Result};
use crate::fft;
use num_complex::Complex64;

/// Spatial discretization of the periodic box `[-L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    half_length: f64,
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n: usize, half_length: f64) -> Result<Self> {
        if n < Self::MIN_POINTS || n % 2 != 0 {
            return Err(CoreError::InvalidGrid(format!(
                "n must be even and >= {}, got {n}",
                Self::MIN_POINTS
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(CoreError::InvalidGrid(format!(
                "half_length must be positive and finite, got {half_length}"
            )));
        }
        Ok(Self { n, half_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + self.dx() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Signed integer wavenumber for FFT bin `idx`.
    pub fn mode(&self, idx: usize) -> i64 {
        if idx <= self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Physical wavenumber `ξ_k = πk/L` for FFT bin `idx` (Nyquist counted
    /// as `-n/2`).
    pub fn wavenumber(&self, idx: usize) -> f64 {
        let k = if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        };
        std::f64::consts::PI * k as f64 / self.half_length
    }

    /// Fold a coordinate into `[-L, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let period = 2.0 * self.half_length;
        let mut y = (x + self.half_length).rem_euclid(period) - self.half_length;
        if y >= self.half_length {
            y -= period;
        }
        y
    }
}

/// Real-valued samples of a field at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n() {
            return Err(CoreError::InvalidField(format!(
                "expected {} samples, got {}",
                grid.n(),
                samples.len()
            )));
        }
        if !samples.iter().all(|v| v.is_finite()) {
            return Err(CoreError::InvalidField("non-finite sample".into()));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.n()],
        }
    }

    pub fn constant(grid: GridSpec, value: f64) -> Result<Self> {
        Self::new(grid, vec![value; grid.n()])
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = (0..grid.n()).map(|j| f(grid.node(j))).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.samples.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Grid mean, i.e. `(1/2L)∫ f dx` under the trapezoid rule.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.grid.n() as f64
    }

    pub fn to_spectral(&self) -> SpectralField {
        SpectralField {
            grid: self.grid,
            coefficients: fft::forward(&self.samples),
        }
    }

    /// `self + scale * other`, grids must match.
    pub fn add_scaled(&self, scale: f64, other: &RealField) -> Result<RealField> {
        if self.grid != other.grid {
            return Err(CoreError::InvalidField("grid mismatch".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + scale * b)
            .collect();
        RealField::new(self.grid, samples)
    }

    /// Circular shift by whole nodes (positive = toward larger x).
    pub fn shift_nodes(&self, by: i64) -> RealField {
        let n = self.grid.n() as i64;
        let samples = (0..n)
            .map(|j| self.samples[(j - by).rem_euclid(n) as usize])
            .collect();
        RealField {
            grid: self.grid,
            samples,
        }
    }
}

/// Fourier-side view of a field: mean-normalized complex coefficients in
/// FFT index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.n() {
            return Err(CoreError::InvalidField(format!(
                "expected {} coefficients, got {}",
                grid.n(),
                coefficients.len()
            )));
        }
        Ok(Self { grid, coefficients })
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coefficients
    }

    /// Largest deviation from Hermitian symmetry `c_{-k} = conj(c_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let mut worst = self.coefficients[0].im.abs();
        worst = worst.max(self.coefficients[n / 2].im.abs());
        for k in 1..n / 2 {
            let d = self.coefficients[k] - self.coefficients[n - k].conj();
            worst = worst.max(d.norm());
        }
        worst
    }

    pub fn to_real(&self) -> RealField {
        RealField {
            grid: self.grid,
            samples: fft::inverse_real(&self.coefficients),
        }
    }

    /// Multiply coefficient `k` by `multiplier(idx, ξ_k)`.
    pub fn scaled_by(&self, multiplier: impl Fn(usize, f64) -> Complex64) -> SpectralField {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(idx, c)| c * multiplier(idx, self.grid.wavenumber(idx)))
            .collect();
        SpectralField {
            grid: self.grid,
            coefficients,
        }
    }

    /// Evaluate the trigonometric interpolant (or its `order`-th derivative)
    /// at an arbitrary point. The basis is `e^{iξ_k (x + L)}` because the
    /// first node sits at `-L`. Odd-order derivatives drop the Nyquist mode.
    pub fn evaluate_at(&self, x: f64, order: u32) -> f64 {
        let n = self.grid.n();
        let phase_x = x + self.grid.half_length();
        let mut acc = Complex64::new(0.0, 0.0);
        for idx in 0..n {
            if idx == n / 2 && order % 2 == 1 {
                continue;
            }
            let xi = self.grid.wavenumber(idx);
            let mult = Complex64::new(0.0, xi).powu(order);
            let weight = if order == 0 {
                self.coefficients[idx]
            } else {
                self.coefficients[idx] * mult
            };
            acc += weight * Complex64::new(0.0, xi * phase_x).exp();
        }
        acc.re
    }
}

/// Trig-interpolate `f` onto the 3x finer grid (exact for band-limited
/// fields). The Nyquist coefficient is split evenly between `±n/2` so the
/// upsampled field stays real.
pub(crate) fn upsample3(f: &RealField) -> Vec<f64> {
    let n = f.grid().n();
    let c = fft::forward(f.samples());
    let big = 3 * n;
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    padded[..n / 2].copy_from_slice(&c[..n / 2]);
    padded[big - n / 2 + 1..].copy_from_slice(&c[n / 2 + 1..]);
    let half_nyq = 0.5 * c[n / 2];
    padded[n / 2] = half_nyq;
    padded[big - n / 2] = half_nyq;
    fft::inverse_real(&padded)
}

/// Project samples on the 3x grid back onto the n-mode space, in
/// coefficient form. Folds the two Nyquist images back together.
pub(crate) fn project3(samples: &[f64], n: usize) -> Vec<Complex64> {
    debug_assert_eq!(samples.len(), 3 * n);
    let big = samples.len();
    let c = fft::forward(samples);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    out[..n / 2].copy_from_slice(&c[..n / 2]);
    out[n / 2 + 1..].copy_from_slice(&c[big - n / 2 + 1..]);
    out[n / 2] = c[n / 2] + c[big - n / 2];
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(GridSpec::new(8, 1.0).is_err());
        assert!(GridSpec::new(17, 1.0).is_err());
        assert!(GridSpec::new(64, 0.0).is_err());
        assert!(GridSpec::new(64, -1.0).is_err());
        let g = GridSpec::new(64, std::f64::consts::PI).unwrap();
        assert_eq!(g.dx() * g.n() as f64, 2.0 * g.half_length());
    }

    #[test]
    fn roundtrip_and_hermitian_symmetry() {
        let g = GridSpec::new(64, std::f64::consts::PI).unwrap();
        let f = RealField::from_fn(g, |x| (x.sin() + 0.3 * (2.0 * x).cos()).exp()).unwrap();
        let s = f.to_spectral();
        assert!(s.hermitian_defect() < 1e-13);
        let back = s.to_real();
        let err: f64 = f
            .samples()
            .iter()
            .zip(back.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-12 * f.max_abs(), "roundtrip error {err}");
    }

    #[test]
    fn upsample_project_identity() {
        let g = GridSpec::new(32, 2.0).unwrap();
        let f = RealField::from_fn(g, |x| (std::f64::consts::PI * x).sin() + 0.5).unwrap();
        let fine = upsample3(&f);
        let c = project3(&fine, 32);
        let back = fft::inverse_real(&c);
        for (a, b) in f.samples().iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolant_matches_closed_form_off_grid() {
        let g = GridSpec::new(128, std::f64::consts::PI).unwrap();
        let f = RealField::from_fn(g, |x| x.sin()).unwrap();
        let s = f.to_spectral();
        assert!((s.evaluate_at(0.37, 0) - (0.37f64).sin()).abs() < 1e-12);
        assert!((s.evaluate_at(0.37, 1) - (0.37f64).cos()).abs() < 1e-11);
        assert!((s.evaluate_at(-1.9, 2) + (-1.9f64).sin()).abs() < 1e-10);
    }

    #[test]
    fn wrap_folds_into_box() {
        let g = GridSpec::new(16, 1.0).unwrap();
        assert!((g.wrap(1.5) - (-0.5)).abs() < 1e-15);
        assert!((g.wrap(-1.25) - 0.75).abs() < 1e-15);
        assert_eq!(g.wrap(0.25), 0.25);
    }
}
