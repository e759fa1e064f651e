//! Right-hand sides of the nonlocal Cauchy problem and its mollified
//! approximations, the third-order-form residual, the slope-dynamics
//! forcing functional, and the model-family coefficient identities.
//!
//! The evolution equation, in nonlocal form:
//!
//! ```text
//! ∂ₜη = ∂ₓη + (7/2)η∂ₓη
//!     + (1-∂ₓ²)⁻¹∂ₓ[ -2η - (5/2)η² + (7/4)(∂ₓη)² + (1/8)η³ - (3/64)η⁴ ]
//! ```
//!
//! All pointwise products are formed on a 3x zero-padded grid and projected
//! back, which dealiases polynomial nonlinearities up to quintic; the
//! quartic bracket term is therefore alias-free with margin.

use crate::error::{CoreError, Result};
use crate::fft;
use crate::grid::{project3, upsample3, GridSpec, RealField};
use crate::mollifier::{mollify, MollifierSpec};
use crate::ops::derivative;
use num_complex::Complex64;

/// Fixed coefficients of the specialized equation, one table for every
/// consumer. All values are dyadic rationals, hence exact in f64.
pub mod coeffs {
    /// -2η inside the Helmholtz bracket.
    pub const LINEAR: f64 = -2.0;
    /// -(5/2)η².
    pub const QUADRATIC: f64 = -2.5;
    /// +(7/4)(∂ₓη)².
    pub const SLOPE_SQUARED: f64 = 1.75;
    /// +(1/8)η³.
    pub const CUBIC: f64 = 0.125;
    /// -(3/64)η⁴.
    pub const QUARTIC: f64 = -3.0 / 64.0;
    /// +(7/2)η∂ₓη transport term outside the bracket.
    pub const TRANSPORT: f64 = 3.5;
}

/// Coefficient family (α, β, γ, δ) of the third-order surface equation,
/// parameterized by q with the scaling parameters μ and ε.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyCoefficients {
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub mu: f64,
    pub eps_amp: f64,
}

/// Coefficients of the induced third-order equation
/// `η_t + η_x + … + μα η_xxx + μβ η_xxt = εμγ ηη_xxx + εμδ η_xη_xx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThirdOrderCoefficients {
    pub mu_alpha: f64,
    pub mu_beta: f64,
    pub eps_mu_gamma: f64,
    pub eps_mu_delta: f64,
}

/// α = q, β = q - 1/6, γ = -(3/2)q - 1/6, δ = -(9/2)q - 5/24.
pub fn family_coefficients(q: f64, mu: f64, eps_amp: f64) -> FamilyCoefficients {
    FamilyCoefficients {
        q,
        alpha: q,
        beta: q - 1.0 / 6.0,
        gamma: -1.5 * q - 1.0 / 6.0,
        delta: -4.5 * q - 5.0 / 24.0,
        mu,
        eps_amp,
    }
}

impl FamilyCoefficients {
    /// The q = 1/12, μ = 12, ε = 1 member integrated by this artifact.
    pub fn specialized() -> Self {
        family_coefficients(1.0 / 12.0, 12.0, 1.0)
    }

    pub fn induced_third_order(&self) -> ThirdOrderCoefficients {
        ThirdOrderCoefficients {
            mu_alpha: self.mu * self.alpha,
            mu_beta: self.mu * self.beta,
            eps_mu_gamma: self.eps_amp * self.mu * self.gamma,
            eps_mu_delta: self.eps_amp * self.mu * self.delta,
        }
    }
}

/// Which right-hand side to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RhsKind {
    NonlocalExact,
    /// Mollifier on each bracket entry and on the transport factors.
    MollifiedA,
    /// Unmollified transport derivative, outer mollifier on the transport
    /// product; the form written as an ODE system.
    MollifiedB,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhsVariant {
    kind: RhsKind,
    mollifier: Option<MollifierSpec>,
}

impl RhsVariant {
    pub fn exact() -> Self {
        Self {
            kind: RhsKind::NonlocalExact,
            mollifier: None,
        }
    }

    pub fn mollified_a(spec: MollifierSpec) -> Self {
        Self {
            kind: RhsKind::MollifiedA,
            mollifier: Some(spec),
        }
    }

    pub fn mollified_b(spec: MollifierSpec) -> Self {
        Self {
            kind: RhsKind::MollifiedB,
            mollifier: Some(spec),
        }
    }

    pub fn kind(&self) -> RhsKind {
        self.kind
    }

    pub fn mollifier(&self) -> Option<&MollifierSpec> {
        self.mollifier.as_ref()
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.mollifier) {
            (RhsKind::NonlocalExact, None) => Ok(()),
            (RhsKind::NonlocalExact, Some(_)) => Err(CoreError::InvalidConfig(
                "exact variant carries a mollifier".into(),
            )),
            (_, Some(_)) => Ok(()),
            (_, None) => Err(CoreError::InvalidConfig(
                "mollified variant without a mollifier".into(),
            )),
        }
    }
}

fn finite_or(samples: Vec<f64>, grid: GridSpec, what: &'static str) -> Result<RealField> {
    if samples.iter().all(|v| v.is_finite()) {
        Ok(RealField::new(grid, samples).expect("length checked"))
    } else {
        Err(CoreError::NonFinite(what))
    }
}

/// Multiplier of `(1-∂ₓ²)⁻¹∂ₓ`, with the Nyquist mode zeroed (odd symbol).
fn helmholtz_dx_multiplier(grid: GridSpec, idx: usize) -> Complex64 {
    if idx == grid.n() / 2 {
        return Complex64::new(0.0, 0.0);
    }
    let xi = grid.wavenumber(idx);
    Complex64::new(0.0, xi / (1.0 + xi * xi))
}

/// Evaluate the exact nonlocal right-hand side.
pub fn rhs(eta: &RealField) -> Result<RealField> {
    let grid = eta.grid();
    let n = grid.n();
    let c = fft::forward(eta.samples());
    let mut cx: Vec<Complex64> = (0..n)
        .map(|idx| c[idx] * Complex64::new(0.0, grid.wavenumber(idx)))
        .collect();
    cx[n / 2] = Complex64::new(0.0, 0.0);

    let e = upsample_coeffs(&c);
    let ex = upsample_coeffs(&cx);
    let big = e.len();
    let mut transport = vec![0.0; big];
    let mut bracket = vec![0.0; big];
    for i in 0..big {
        let (v, s) = (e[i], ex[i]);
        transport[i] = coeffs::TRANSPORT * v * s;
        bracket[i] = coeffs::LINEAR * v
            + coeffs::QUADRATIC * v * v
            + coeffs::SLOPE_SQUARED * s * s
            + coeffs::CUBIC * v * v * v
            + coeffs::QUARTIC * v * v * v * v;
    }
    let tb = project3(&transport, n);
    let bb = project3(&bracket, n);
    let out_hat: Vec<Complex64> = (0..n)
        .map(|idx| cx[idx] + tb[idx] + helmholtz_dx_multiplier(grid, idx) * bb[idx])
        .collect();
    finite_or(fft::inverse_real(&out_hat), grid, "rhs")
}

fn upsample_coeffs(c: &[Complex64]) -> Vec<f64> {
    let n = c.len();
    let big = 3 * n;
    let mut padded = vec![Complex64::new(0.0, 0.0); big];
    padded[..n / 2].copy_from_slice(&c[..n / 2]);
    padded[big - n / 2 + 1..].copy_from_slice(&c[n / 2 + 1..]);
    let half_nyq = 0.5 * c[n / 2];
    padded[n / 2] = half_nyq;
    padded[big - n / 2] = half_nyq;
    fft::inverse_real(&padded)
}

/// Dealiased pointwise product of two fields.
pub fn dealiased_product(a: &RealField, b: &RealField) -> Result<RealField> {
    if a.grid() != b.grid() {
        return Err(CoreError::InvalidField("grid mismatch".into()));
    }
    let n = a.grid().n();
    let ap = upsample3(a);
    let bp = upsample3(b);
    let prod: Vec<f64> = ap.iter().zip(&bp).map(|(x, y)| x * y).collect();
    let c = project3(&prod, n);
    finite_or(fft::inverse_real(&c), a.grid(), "dealiased product")
}

/// Dealiased powers η², η³, η⁴ from a single upsample.
fn dealiased_powers(eta: &RealField) -> (RealField, RealField, RealField) {
    let n = eta.grid().n();
    let e = upsample3(eta);
    let sq: Vec<f64> = e.iter().map(|v| v * v).collect();
    let cu: Vec<f64> = e.iter().map(|v| v * v * v).collect();
    let qu: Vec<f64> = e.iter().map(|v| v * v * v * v).collect();
    let to_field = |s: &[f64]| {
        RealField::new(eta.grid(), fft::inverse_real(&project3(s, n))).expect("projection")
    };
    (to_field(&sq), to_field(&cu), to_field(&qu))
}

fn apply_helmholtz_dx(f: &RealField) -> RealField {
    let grid = f.grid();
    let c = fft::forward(f.samples());
    let out: Vec<Complex64> = (0..grid.n())
        .map(|idx| c[idx] * helmholtz_dx_multiplier(grid, idx))
        .collect();
    RealField::new(grid, fft::inverse_real(&out)).expect("multiplier output")
}

/// Evaluate the mollified approximate system, either placement.
pub fn rhs_mollified(eta: &RealField, variant: &RhsVariant) -> Result<RealField> {
    variant.validate()?;
    let spec = variant
        .mollifier()
        .ok_or_else(|| CoreError::InvalidConfig("mollified variant without mollifier".into()))?;
    let grid = eta.grid();
    let eta_x = derivative(eta, 1)?;
    let j_eta = mollify(eta, spec)?;
    let j_eta_x = mollify(&eta_x, spec)?;

    let (sq, cu, qu) = dealiased_powers(eta);
    let slope_sq = dealiased_product(&eta_x, &eta_x)?;
    let mut bracket = vec![0.0; grid.n()];
    for (dst, ((((je, s2), sx2), c3), q4)) in bracket.iter_mut().zip(
        j_eta
            .samples()
            .iter()
            .zip(mollify(&sq, spec)?.samples())
            .zip(mollify(&slope_sq, spec)?.samples())
            .zip(mollify(&cu, spec)?.samples())
            .zip(mollify(&qu, spec)?.samples()),
    ) {
        *dst = coeffs::LINEAR * je
            + coeffs::QUADRATIC * s2
            + coeffs::SLOPE_SQUARED * sx2
            + coeffs::CUBIC * c3
            + coeffs::QUARTIC * q4;
    }
    let bracket = RealField::new(grid, bracket)?;
    let nonlocal = mollify(&apply_helmholtz_dx(&bracket), spec)?;

    let transport_product = dealiased_product(&j_eta, &j_eta_x)?;
    let out = match variant.kind() {
        RhsKind::MollifiedA => {
            // J∂ₓη + (7/2)(Jη)(J∂ₓη) + J Λ⁻²∂ₓ[bracket]
            let mut s = vec![0.0; grid.n()];
            for (dst, ((jx, tp), nl)) in s.iter_mut().zip(
                j_eta_x
                    .samples()
                    .iter()
                    .zip(transport_product.samples())
                    .zip(nonlocal.samples()),
            ) {
                *dst = jx + coeffs::TRANSPORT * tp + nl;
            }
            s
        }
        RhsKind::MollifiedB => {
            // ∂ₓη + (7/2)J[(Jη)(J∂ₓη)] + J Λ⁻²∂ₓ[bracket]
            let outer = mollify(&transport_product, spec)?;
            let mut s = vec![0.0; grid.n()];
            for (dst, ((dx, tp), nl)) in s.iter_mut().zip(
                eta_x
                    .samples()
                    .iter()
                    .zip(outer.samples())
                    .zip(nonlocal.samples()),
            ) {
                *dst = dx + coeffs::TRANSPORT * tp + nl;
            }
            s
        }
        RhsKind::NonlocalExact => unreachable!("validated above"),
    };
    finite_or(out, grid, "rhs_mollified")
}

/// Dispatch on the configured right-hand side.
pub fn rhs_by_variant(eta: &RealField, variant: &RhsVariant) -> Result<RealField> {
    match variant.kind() {
        RhsKind::NonlocalExact => rhs(eta),
        _ => rhs_mollified(eta, variant),
    }
}

/// Pointwise residual of the third-order form evaluated with
/// `η_t := rhs(η)` and `η_xxt := ∂ₓ²rhs(η)`:
///
/// ```text
/// η_t + η_x + (3/2)ηη_x - (3/8)η²η_x + (3/16)η³η_x + η_xxx - η_xxt
///   + (7/2)ηη_xxx + 7η_xη_xx
/// ```
///
/// A near-zero residual certifies the equivalence of the third-order and
/// nonlocal forms on this input. The third-derivative coefficients come
/// from the q = 1/12 member of the coefficient family.
pub fn third_order_residual(eta: &RealField) -> Result<RealField> {
    let grid = eta.grid();
    let n = grid.n();
    let third = FamilyCoefficients::specialized().induced_third_order();

    let eta_t = rhs(eta)?;
    let eta_x = derivative(eta, 1)?;
    let eta_xx = derivative(eta, 2)?;
    let eta_xxx = derivative(eta, 3)?;
    let eta_xxt = derivative(&eta_t, 2)?;

    let e = upsample3(eta);
    let ex = upsample3(&eta_x);
    let exx = upsample3(&eta_xx);
    let exxx = upsample3(&eta_xxx);
    let big = e.len();
    let mut nonlinear = vec![0.0; big];
    let eps = FamilyCoefficients::specialized().eps_amp;
    for i in 0..big {
        let (v, s) = (e[i], ex[i]);
        nonlinear[i] = 1.5 * eps * v * s - 0.375 * eps * eps * v * v * s
            + 0.1875 * eps * eps * eps * v * v * v * s
            - third.eps_mu_gamma * v * exxx[i]
            - third.eps_mu_delta * s * exx[i];
    }
    let nl = project3(&nonlinear, n);
    let ct = fft::forward(eta_t.samples());
    let cx = fft::forward(eta_x.samples());
    let cxxx = fft::forward(eta_xxx.samples());
    let cxxt = fft::forward(eta_xxt.samples());
    let out: Vec<Complex64> = (0..n)
        .map(|idx| {
            ct[idx] + cx[idx] + nl[idx] + third.mu_alpha * cxxx[idx] + third.mu_beta * cxxt[idx]
        })
        .collect();
    finite_or(fft::inverse_real(&out), grid, "third_order_residual")
}

/// The slope-dynamics forcing functional on the whole grid:
///
/// ```text
/// f = g_x ∗ ( -2η_x - 5ηη_x + (3/8)η²η_x - (3/16)η³η_x )
/// ```
///
/// with `g_x∗` realized as `∂ₓ(1-∂ₓ²)⁻¹`. The four coefficients are the
/// x-derivatives of the bracket's polynomial terms.
pub fn f_functional(eta: &RealField) -> Result<RealField> {
    let grid = eta.grid();
    let n = grid.n();
    let c = fft::forward(eta.samples());
    let mut cx: Vec<Complex64> = (0..n)
        .map(|idx| c[idx] * Complex64::new(0.0, grid.wavenumber(idx)))
        .collect();
    cx[n / 2] = Complex64::new(0.0, 0.0);
    let e = upsample_coeffs(&c);
    let ex = upsample_coeffs(&cx);
    let big = e.len();
    let mut arg = vec![0.0; big];
    for i in 0..big {
        let (v, s) = (e[i], ex[i]);
        arg[i] = coeffs::LINEAR * s
            + 2.0 * coeffs::QUADRATIC * v * s
            + 3.0 * coeffs::CUBIC * v * v * s
            + 4.0 * coeffs::QUARTIC * v * v * v * s;
    }
    let ca = project3(&arg, n);
    let out: Vec<Complex64> = (0..n)
        .map(|idx| ca[idx] * helmholtz_dx_multiplier(grid, idx))
        .collect();
    finite_or(fft::inverse_real(&out), grid, "f_functional")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::MollifierVariant;
    use std::f64::consts::PI;

    #[test]
    fn family_members() {
        let f = family_coefficients(1.0 / 12.0, 12.0, 1.0);
        assert!((f.alpha - 1.0 / 12.0).abs() < 1e-15);
        assert!((f.beta + 1.0 / 12.0).abs() < 1e-15);
        assert!((f.gamma + 7.0 / 24.0).abs() < 1e-15);
        assert!((f.delta + 7.0 / 12.0).abs() < 1e-15);
        let t = f.induced_third_order();
        assert!((t.mu_alpha - 1.0).abs() < 1e-14);
        assert!((t.mu_beta + 1.0).abs() < 1e-14);
        assert!((t.eps_mu_gamma + 3.5).abs() < 1e-14);
        assert!((t.eps_mu_delta + 7.0).abs() < 1e-14);

        let z = family_coefficients(0.0, 1.0, 1.0);
        assert_eq!(z.alpha, 0.0);
        assert!((z.beta + 1.0 / 6.0).abs() < 1e-16);
        assert!((z.gamma + 1.0 / 6.0).abs() < 1e-16);
        assert!((z.delta + 5.0 / 24.0).abs() < 1e-16);

        let third = family_coefficients(1.0 / 3.0, 1.0, 1.0);
        assert!((third.alpha - 1.0 / 3.0).abs() < 1e-15);
        assert!((third.beta - 1.0 / 6.0).abs() < 1e-15);
        assert!((third.gamma + 2.0 / 3.0).abs() < 1e-15);
        assert!((third.delta + 41.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_fixed_points() {
        let g = GridSpec::new(64, PI).unwrap();
        assert_eq!(rhs(&RealField::zeros(g)).unwrap().max_abs(), 0.0);
        let c = RealField::constant(g, 0.7).unwrap();
        assert!(rhs(&c).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn rhs_linearized_dispersion() {
        let g = GridSpec::new(256, PI).unwrap();
        let delta = 1e-6;
        // k = 2: amplitude delta * k (k²-1)/(k²+1) = 1.2 delta on cos(2x)
        let f = RealField::from_fn(g, |x| delta * (2.0 * x).sin()).unwrap();
        let r = rhs(&f).unwrap();
        let err = r
            .samples()
            .iter()
            .zip(g.nodes())
            .map(|(v, x)| (v - 1.2 * delta * (2.0 * x).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-12, "dispersion deviation {err}");
        // k = 1: the linear part cancels, leaving O(delta²)
        let f1 = RealField::from_fn(g, |x| delta * x.sin()).unwrap();
        assert!(rhs(&f1).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn mollified_variants_fixed_points() {
        let g = GridSpec::new(64, PI).unwrap();
        for variant in [
            RhsVariant::mollified_a(MollifierSpec::spectral(0.2).unwrap()),
            RhsVariant::mollified_b(MollifierSpec::spectral(0.2).unwrap()),
        ] {
            let z = rhs_mollified(&RealField::zeros(g), &variant).unwrap();
            assert_eq!(z.max_abs(), 0.0);
            let c = RealField::constant(g, 0.4).unwrap();
            assert!(rhs_mollified(&c, &variant).unwrap().max_abs() < 1e-13);
        }
    }

    #[test]
    fn variant_validation() {
        assert!(RhsVariant::exact().validate().is_ok());
        let spec = MollifierSpec::new(0.2, MollifierVariant::SpectralCutoff).unwrap();
        assert!(RhsVariant::mollified_a(spec).validate().is_ok());
    }

    #[test]
    fn residual_trivial_inputs() {
        let g = GridSpec::new(64, PI).unwrap();
        assert_eq!(
            third_order_residual(&RealField::zeros(g)).unwrap().max_abs(),
            0.0
        );
        let c = RealField::constant(g, 0.3).unwrap();
        assert!(third_order_residual(&c).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn f_functional_of_zero() {
        let g = GridSpec::new(64, PI).unwrap();
        assert_eq!(f_functional(&RealField::zeros(g)).unwrap().max_abs(), 0.0);
    }
}
