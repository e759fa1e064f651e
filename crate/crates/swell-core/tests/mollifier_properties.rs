//! The mollifier property suite on a rough deterministic fixture, plus the
//! monotonicity and linearity invariants.

use swell_core::grid::{GridSpec, RealField};
use swell_core::mollifier::{
    mollify, verification_field as rough_field, verify_mollifier_properties, MollifierSpec,
};
use swell_core::ops;
use std::f64::consts::PI;

#[test]
fn property_suite_bump_variant() {
    let grid = GridSpec::new(512, PI).unwrap();
    let f = rough_field(grid);
    let spec = MollifierSpec::bump(0.4).unwrap();
    let report = verify_mollifier_properties(&f, &spec).unwrap();
    assert!(report.linf_pass, "ratio {}", report.linf_ratio);
    assert!(report.commutation_pass, "defect {}", report.commutation_defect);
    assert!(
        report.convergence_pass,
        "order {} outside window",
        report.convergence_order
    );
    assert!(
        report.growth_pass[0] && report.growth_pass[1],
        "exponents {:?}",
        report.growth_exponents
    );
    assert!(report.all_pass());
}

#[test]
fn property_suite_spectral_variant() {
    let grid = GridSpec::new(512, PI).unwrap();
    let f = rough_field(grid);
    let spec = MollifierSpec::spectral(0.4).unwrap();
    let report = verify_mollifier_properties(&f, &spec).unwrap();
    assert!(report.linf_pass);
    assert!(
        report.commutation_defect <= 1e-12,
        "spectral commutation defect {}",
        report.commutation_defect
    );
    assert!(report.convergence_pass, "order {}", report.convergence_order);
    assert!(report.growth_pass[0] && report.growth_pass[1]);
}

#[test]
fn non_expansion_on_sine() {
    let grid = GridSpec::new(512, PI).unwrap();
    let f = RealField::from_fn(grid, f64::sin).unwrap();
    let spec = MollifierSpec::bump(0.2).unwrap();
    let jf = mollify(&f, &spec).unwrap();
    let ratio = jf.max_abs() / f.max_abs();
    assert!(ratio <= 1.0 + 1e-10, "ratio {ratio}");
}

#[test]
fn smoothing_is_monotone_in_epsilon() {
    // ‖J_ε1 f - f‖_{L²} <= ‖J_ε2 f - f‖_{L²} for ε1 <= ε2, spectral variant
    let grid = GridSpec::new(256, PI).unwrap();
    let f = RealField::from_fn(grid, |x| x.sin() + 0.4 * (3.0 * x).cos() + 0.1 * (7.0 * x).sin())
        .unwrap();
    let mut prev = f64::INFINITY;
    for &eps in &[0.8, 0.4, 0.2, 0.1, 0.05] {
        let jf = mollify(&f, &MollifierSpec::spectral(eps).unwrap()).unwrap();
        let err = ops::sobolev_norm(&jf.add_scaled(-1.0, &f).unwrap(), 0.0).unwrap();
        assert!(err <= prev + 1e-14, "eps {eps}: {err} > {prev}");
        prev = err;
    }
}

#[test]
fn mean_preserved_by_both_variants() {
    let grid = GridSpec::new(512, PI).unwrap();
    let f = RealField::from_fn(grid, |x| 0.7 + x.sin() * (-x * x).exp()).unwrap();
    let mean = f.mean();
    for spec in [
        MollifierSpec::bump(0.3).unwrap(),
        MollifierSpec::spectral(0.3).unwrap(),
    ] {
        let jf = mollify(&f, &spec).unwrap();
        assert!(
            (jf.mean() - mean).abs() <= 1e-12,
            "{:?}: mean drift {}",
            spec.variant(),
            (jf.mean() - mean).abs()
        );
    }
}
