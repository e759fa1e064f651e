//! Initial-data families and their generator.

use anyhow::{bail, Result};
use swell_core::grid::{GridSpec, RealField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialFamily {
    Gaussian,
    Sech2,
    SinePacket,
    SteepRamp,
}

impl InitialFamily {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gaussian" => Self::Gaussian,
            "sech2" => Self::Sech2,
            "sine_packet" => Self::SinePacket,
            "steep_ramp" => Self::SteepRamp,
            other => bail!("unknown initial family '{other}'"),
        })
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Sech2 => "sech2",
            Self::SinePacket => "sine_packet",
            Self::SteepRamp => "steep_ramp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialDataSpec {
    pub family: InitialFamily,
    pub amplitude: f64,
    pub width: f64,
    pub center: f64,
    /// Carrier mode for `sine_packet`; ignored by the other families.
    pub wavenumber: Option<u32>,
}

impl InitialDataSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            bail!("initial width must be positive, got {}", self.width);
        }
        if !self.amplitude.is_finite() || !self.center.is_finite() {
            bail!("initial amplitude and center must be finite");
        }
        match (self.family, self.wavenumber) {
            (InitialFamily::SinePacket, None) => {
                bail!("sine_packet requires initial.wavenumber")
            }
            (InitialFamily::SinePacket, Some(0)) => {
                bail!("initial.wavenumber must be positive")
            }
            _ => Ok(()),
        }
    }
}

/// Acceptable magnitude of the initial data at the box seam. The periodic
/// surrogate of the line problem requires the data (and its low
/// derivatives) to vanish there to rounding.
pub const BOUNDARY_DECAY: f64 = 1e-12;

/// Evaluate the family at the grid nodes, enforcing boundary decay.
pub fn make_initial_data(spec: &InitialDataSpec, grid: GridSpec) -> Result<RealField> {
    spec.validate()?;
    let (a, w, c) = (spec.amplitude, spec.width, spec.center);
    let l = grid.half_length();
    let field = match spec.family {
        InitialFamily::Gaussian => {
            RealField::from_fn(grid, |x| a * (-((x - c) / w) * ((x - c) / w)).exp())
        }
        InitialFamily::Sech2 => RealField::from_fn(grid, |x| {
            let s = 1.0 / ((x - c) / w).cosh();
            a * s * s
        }),
        InitialFamily::SinePacket => {
            let k = f64::from(spec.wavenumber.expect("validated"));
            RealField::from_fn(grid, |x| {
                a * (k * std::f64::consts::PI * x / l).sin()
                    * (-((x - c) / w) * ((x - c) / w)).exp()
            })
        }
        InitialFamily::SteepRamp => RealField::from_fn(grid, |x| {
            let envelope_w = 10.0 * w;
            a * ((x - c) / w).tanh() * (-((x - c) / envelope_w) * ((x - c) / envelope_w)).exp()
        }),
    }?;

    let n = grid.n();
    let boundary = field.samples()[..3]
        .iter()
        .chain(&field.samples()[n - 3..])
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if boundary > BOUNDARY_DECAY {
        bail!(
            "initial data does not decay at the box boundary: |η| = {boundary:.3e} > {BOUNDARY_DECAY:.0e}; widen the domain"
        );
    }
    Ok(field)
}
