//! Thin wrapper around rustfft with a process-wide plan cache.
//!
//! Coefficients are mean-normalized: `coeffs[k] = (1/n) Σ_j f_j e^{-2πijk/n}`,
//! so `coeffs[0]` is the field mean and Parseval reads
//! `Σ_k |c_k|² · 2L = ∫ |f|² dx` for the trapezoid/exact integral of a
//! band-limited field.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plans = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<Plans>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

/// Forward transform of real samples to mean-normalized coefficients.
pub fn forward(samples: &[f64]) -> Vec<Complex64> {
    let n = samples.len();
    let mut buf: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, true).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Inverse transform of mean-normalized coefficients; returns the real part.
pub fn inverse_real(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    plan(coeffs.len(), false).process(&mut buf);
    buf.iter().map(|c| c.re).collect()
}
