//! Pseudospectral simulation library for the one-dimensional free-surface
//! shallow-water wave equation in nonlocal (Helmholtz-inverted) form,
//!
//! ```text
//! ∂ₜη = ∂ₓη + (7/2)η∂ₓη
//!     + (1-∂ₓ²)⁻¹∂ₓ[ -2η - (5/2)η² + (7/4)(∂ₓη)² + (1/8)η³ - (3/64)η⁴ ],
//! ```
//!
//! on a periodic box `[-L, L)` wide enough that the data decays below
//! rounding at the seam. The crate provides
//!
//! - spectral operators, Sobolev norms, the conserved energy
//!   `H = ½∫(η² + η_x²)dx`, and extremal-slope extraction ([`ops`]);
//! - the mollifier 𝓙_ε in bump-convolution and spectral-cutoff form with
//!   an empirical property checker ([`mollifier`]);
//! - the exact and mollified right-hand sides, the third-order-form
//!   residual, and the slope-forcing functional ([`dynamics`]);
//! - RK4 integration with CFL control, stop detection and trajectory
//!   recording ([`integrator`]);
//! - breaking-time prediction, Riccati comparison of the recorded slope,
//!   and Lagrangian characteristics ([`breaking`]).
//!
//! All operations are pure and deterministic: identical inputs produce
//! bit-identical outputs.

mod fft;

pub use num_complex;

pub mod breaking;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod grid;
pub mod integrator;
pub mod mollifier;
pub mod ops;

pub use error::{CoreError, Result};
pub use grid::{GridSpec, RealField, SpectralField};
pub use ops::ExtremumKind;
