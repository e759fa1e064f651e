//! Oracle-backed checks of the spectral operator layer: the periodized
//! Green kernel quadrature against the multiplier path, Parseval, and the
//! operator identities the rest of the crate leans on.

use num_complex::Complex64;
use swell_core::grid::{GridSpec, RealField};
use swell_core::ops;
use std::f64::consts::PI;

/// Deterministic band-limited field: modes up to `kmax` with amplitudes
/// decaying like e^{-rate k} and phases from a fixed linear congruential
/// sequence. Normalized to unit max.
fn band_limited(grid: GridSpec, kmax: usize, rate: f64, seed: u64) -> RealField {
    let n = grid.n();
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=kmax {
        let amp = (-rate * k as f64).exp();
        let phase = 2.0 * PI * next();
        let c = amp * Complex64::new(phase.cos(), phase.sin());
        coeffs[k] = c;
        coeffs[n - k] = c.conj();
    }
    let f = swell_core::SpectralField::new(grid, coeffs).unwrap().to_real();
    let m = f.max_abs();
    RealField::new(grid, f.samples().iter().map(|v| v / m).collect()).unwrap()
}

#[test]
fn green_kernel_oracle_agrees_with_multiplier() {
    let grid = GridSpec::new(1024, 20.0 * PI).unwrap();
    let mut worst: f64 = 0.0;
    for trial in 0..5 {
        let f = band_limited(grid, 25, 0.3, 1000 + trial);
        let by_kernel = ops::green_kernel_convolution(&f);
        let by_symbol = ops::helmholtz_inverse(&f);
        let err = by_kernel
            .samples()
            .iter()
            .zip(by_symbol.samples())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    assert!(worst <= 1e-8, "kernel vs multiplier max error {worst}");
}

#[test]
fn helmholtz_inverts_one_minus_second_derivative() {
    let grid = GridSpec::new(512, 5.0).unwrap();
    let f = band_limited(grid, 40, 0.2, 7);
    let fxx = ops::derivative(&f, 2).unwrap();
    let arg = f.add_scaled(-1.0, &fxx).unwrap();
    let back = ops::helmholtz_inverse(&arg);
    let err = back
        .samples()
        .iter()
        .zip(f.samples())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(err <= 1e-11, "identity defect {err}");
}

#[test]
fn parseval_against_trapezoid() {
    let grid = GridSpec::new(256, 3.0).unwrap();
    let f = band_limited(grid, 30, 0.15, 42);
    let l2 = ops::sobolev_norm(&f, 0.0).unwrap();
    let quad: f64 = f.samples().iter().map(|v| v * v).sum::<f64>() * grid.dx();
    assert!(
        (l2 * l2 - quad).abs() <= 1e-10 * quad,
        "parseval defect {}",
        (l2 * l2 - quad) / quad
    );
}

#[test]
fn energy_is_half_h1_squared_same_code_path() {
    let grid = GridSpec::new(128, 2.0).unwrap();
    let f = band_limited(grid, 20, 0.25, 3);
    let h1 = ops::sobolev_norm(&f, 1.0).unwrap();
    assert_eq!(ops::energy(&f), 0.5 * h1 * h1);
}

#[test]
fn derivative_commutes_with_node_shifts() {
    let grid = GridSpec::new(128, PI).unwrap();
    let f = band_limited(grid, 15, 0.3, 11);
    for order in 1..=3 {
        let a = ops::derivative(&f.shift_nodes(17), order).unwrap();
        let b = ops::derivative(&f, order).unwrap().shift_nodes(17);
        let err = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let scale = ops::derivative(&f, order).unwrap().max_abs().max(1.0);
        assert!(err <= 1e-12 * scale, "order {order}: shift defect {err}");
    }
}
