//! Randomized structural invariants.

use proptest::prelude::*;
use swell_core::breaking::breaking_constant;
use swell_core::grid::{GridSpec, RealField};
use swell_core::mollifier::{mollify, MollifierSpec};
use swell_core::ops;
use std::f64::consts::PI;

fn smooth_field(amps: &[f64], phases: &[f64]) -> RealField {
    let grid = GridSpec::new(128, PI).unwrap();
    RealField::from_fn(grid, |x| {
        amps.iter()
            .zip(phases)
            .enumerate()
            .map(|(k, (a, p))| a * ((k + 1) as f64 * x + p).sin())
            .sum()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn derivative_is_linear(
        amps in prop::collection::vec(-1.0f64..1.0, 4),
        phases in prop::collection::vec(0.0f64..(2.0 * PI), 4),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let f = smooth_field(&amps, &phases);
        let g = smooth_field(&phases, &amps); // reuse vectors, different field
        let combo = RealField::new(
            f.grid(),
            f.samples().iter().zip(g.samples()).map(|(x, y)| a * x + b * y).collect(),
        ).unwrap();
        let lhs = ops::derivative(&combo, 1).unwrap();
        let fx = ops::derivative(&f, 1).unwrap();
        let gx = ops::derivative(&g, 1).unwrap();
        let scale = fx.max_abs().max(gx.max_abs()).max(1.0);
        for ((l, x), y) in lhs.samples().iter().zip(fx.samples()).zip(gx.samples()) {
            prop_assert!((l - (a * x + b * y)).abs() <= 1e-11 * scale * (1.0 + a.abs() + b.abs()));
        }
    }

    #[test]
    fn derivative_commutes_with_shifts(
        amps in prop::collection::vec(-1.0f64..1.0, 4),
        phases in prop::collection::vec(0.0f64..(2.0 * PI), 4),
        shift in -40i64..40,
    ) {
        let f = smooth_field(&amps, &phases);
        let a = ops::derivative(&f.shift_nodes(shift), 1).unwrap();
        let b = ops::derivative(&f, 1).unwrap().shift_nodes(shift);
        let scale = b.max_abs().max(1.0);
        for (x, y) in a.samples().iter().zip(b.samples()) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn mollify_is_linear_in_the_field(
        amps in prop::collection::vec(-1.0f64..1.0, 4),
        phases in prop::collection::vec(0.0f64..(2.0 * PI), 4),
        a in -2.0f64..2.0,
    ) {
        let f = smooth_field(&amps, &phases);
        let g = smooth_field(&phases, &amps);
        let spec = MollifierSpec::spectral(0.25).unwrap();
        let combo = f.add_scaled(a, &g).unwrap();
        let lhs = mollify(&combo, &spec).unwrap();
        let rhs = mollify(&f, &spec).unwrap().add_scaled(a, &mollify(&g, &spec).unwrap()).unwrap();
        for (x, y) in lhs.samples().iter().zip(rhs.samples()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn breaking_constant_monotone(h1a in 0.0f64..30.0, h1b in 0.0f64..30.0) {
        let (lo, hi) = if h1a <= h1b { (h1a, h1b) } else { (h1b, h1a) };
        prop_assert!(breaking_constant(lo) <= breaking_constant(hi));
    }
}
