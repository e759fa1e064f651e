//! Flat key=value experiment configuration with dotted section keys.
//!
//! ```text
//! grid.n=1024
//! grid.half_length=62.83185307179586
//! initial.family=gaussian
//! initial.amplitude=0.1
//! initial.width=2.0
//! solver.t_end=1.0
//! solver.dt_init=0.05
//! ```
//!
//! Unknown keys are errors. Blank lines and `#` comments are allowed.

use crate::initial::{InitialDataSpec, InitialFamily};
use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use swell_core::dynamics::{RhsKind, RhsVariant};
use swell_core::grid::GridSpec;
use swell_core::integrator::SolverConfig;
use swell_core::mollifier::{MollifierSpec, MollifierVariant};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub initial: InitialDataSpec,
    pub solver: SolverConfig,
    pub sobolev_s: f64,
    pub output_dir: PathBuf,
}

impl ExperimentConfig {
    /// Parse the key=value text, applying defaults for the optional solver
    /// dials.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key=value, got '{raw}'", lineno + 1))?;
            let key = key.trim().to_string();
            if map.insert(key.clone(), value.trim().to_string()).is_some() {
                bail!("duplicate key '{key}'");
            }
        }
        Self::from_map(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    fn from_map(mut map: BTreeMap<String, String>) -> Result<Self> {
        fn take(map: &mut BTreeMap<String, String>, key: &str) -> Option<String> {
            map.remove(key)
        }
        fn req(map: &mut BTreeMap<String, String>, key: &str) -> Result<String> {
            take(map, key).ok_or_else(|| anyhow!("missing required key '{key}'"))
        }
        fn parse_f64(key: &str, v: &str) -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| anyhow!("key '{key}': cannot parse '{v}' as a number"))
        }

        let n: usize = req(&mut map, "grid.n")?
            .parse()
            .context("grid.n must be a positive integer")?;
        let half_length = parse_f64("grid.half_length", &req(&mut map, "grid.half_length")?)?;
        let grid = GridSpec::new(n, half_length).map_err(|e| anyhow!("{e}"))?;

        let family = InitialFamily::parse(&req(&mut map, "initial.family")?)?;
        let amplitude = parse_f64("initial.amplitude", &req(&mut map, "initial.amplitude")?)?;
        let width = parse_f64("initial.width", &req(&mut map, "initial.width")?)?;
        let center = match take(&mut map, "initial.center") {
            Some(v) => parse_f64("initial.center", &v)?,
            None => 0.0,
        };
        let wavenumber = match take(&mut map, "initial.wavenumber") {
            Some(v) => Some(
                v.parse::<u32>()
                    .context("initial.wavenumber must be a positive integer")?,
            ),
            None => None,
        };
        let initial = InitialDataSpec {
            family,
            amplitude,
            width,
            center,
            wavenumber,
        };
        initial.validate()?;

        let t_end = parse_f64("solver.t_end", &req(&mut map, "solver.t_end")?)?;
        let dt_init = parse_f64("solver.dt_init", &req(&mut map, "solver.dt_init")?)?;
        let mut solver = SolverConfig::new(t_end, dt_init);
        if let Some(v) = take(&mut map, "solver.cfl") {
            solver.cfl = parse_f64("solver.cfl", &v)?;
        }
        if let Some(v) = take(&mut map, "solver.slope_stop") {
            solver.slope_stop = parse_f64("solver.slope_stop", &v)?;
        }
        if let Some(v) = take(&mut map, "solver.energy_drift_stop") {
            solver.energy_drift_stop = parse_f64("solver.energy_drift_stop", &v)?;
        }
        if let Some(v) = take(&mut map, "solver.record_every") {
            solver.record_every = v
                .parse()
                .context("solver.record_every must be a positive integer")?;
        }

        let variant_name = take(&mut map, "solver.variant").unwrap_or_else(|| "nonlocal_exact".into());
        let moll_eps = take(&mut map, "solver.mollifier.epsilon");
        let moll_variant = take(&mut map, "solver.mollifier.variant");
        solver.variant = match variant_name.as_str() {
            "nonlocal_exact" => {
                if moll_eps.is_some() || moll_variant.is_some() {
                    bail!("solver.mollifier.* keys require a mollified solver.variant");
                }
                RhsVariant::exact()
            }
            name @ ("mollified_a" | "mollified_b") => {
                let eps = parse_f64(
                    "solver.mollifier.epsilon",
                    &moll_eps.ok_or_else(|| {
                        anyhow!("solver.variant={name} requires solver.mollifier.epsilon")
                    })?,
                )?;
                let mv = match moll_variant.as_deref().unwrap_or("bump_convolution") {
                    "bump_convolution" => MollifierVariant::BumpConvolution,
                    "spectral_cutoff" => MollifierVariant::SpectralCutoff,
                    other => bail!("unknown mollifier variant '{other}'"),
                };
                let spec = MollifierSpec::new(eps, mv).map_err(|e| anyhow!("{e}"))?;
                if name == "mollified_a" {
                    RhsVariant::mollified_a(spec)
                } else {
                    RhsVariant::mollified_b(spec)
                }
            }
            other => bail!("unknown solver.variant '{other}'"),
        };

        let sobolev_s = match take(&mut map, "sobolev_s") {
            Some(v) => parse_f64("sobolev_s", &v)?,
            None => 1.75,
        };
        if !(sobolev_s > 1.5) {
            bail!("sobolev_s must exceed 3/2, got {sobolev_s}");
        }
        solver.sobolev_s = sobolev_s;
        solver.validate().map_err(|e| anyhow!("{e}"))?;

        let output_dir = PathBuf::from(take(&mut map, "output_dir").unwrap_or_else(|| "runs".into()));

        if !map.is_empty() {
            let unknown: Vec<&str> = map.keys().map(String::as_str).collect();
            bail!("unknown config keys: {}", unknown.join(", "));
        }

        Ok(Self {
            grid,
            initial,
            solver,
            sobolev_s,
            output_dir,
        })
    }

    /// Canonical key=value rendering: the parse-back-identical fingerprint
    /// of this configuration.
    pub fn canonical(&self) -> String {
        let mut lines = vec![
            format!("grid.n={}", self.grid.n()),
            format!("grid.half_length={}", self.grid.half_length()),
            format!("initial.family={}", self.initial.family.as_str()),
            format!("initial.amplitude={}", self.initial.amplitude),
            format!("initial.width={}", self.initial.width),
            format!("initial.center={}", self.initial.center),
        ];
        if let Some(k) = self.initial.wavenumber {
            lines.push(format!("initial.wavenumber={k}"));
        }
        lines.push(format!("solver.t_end={}", self.solver.t_end));
        lines.push(format!("solver.dt_init={}", self.solver.dt_init));
        lines.push(format!("solver.cfl={}", self.solver.cfl));
        lines.push(format!("solver.slope_stop={}", self.solver.slope_stop));
        lines.push(format!(
            "solver.energy_drift_stop={}",
            self.solver.energy_drift_stop
        ));
        lines.push(format!("solver.record_every={}", self.solver.record_every));
        let variant = match self.solver.variant.kind() {
            RhsKind::NonlocalExact => "nonlocal_exact",
            RhsKind::MollifiedA => "mollified_a",
            RhsKind::MollifiedB => "mollified_b",
        };
        lines.push(format!("solver.variant={variant}"));
        if let Some(spec) = self.solver.variant.mollifier() {
            lines.push(format!("solver.mollifier.epsilon={}", spec.epsilon()));
            let mv = match spec.variant() {
                MollifierVariant::BumpConvolution => "bump_convolution",
                MollifierVariant::SpectralCutoff => "spectral_cutoff",
            };
            lines.push(format!("solver.mollifier.variant={mv}"));
        }
        lines.push(format!("sobolev_s={}", self.sobolev_s));
        lines.push(format!("output_dir={}", self.output_dir.display()));
        lines.join("\n") + "\n"
    }

    /// Deterministic run id: content hash of the canonical configuration.
    pub fn id(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
