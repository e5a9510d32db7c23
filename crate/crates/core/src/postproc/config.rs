//! TOML case descriptions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::assembly::LoadProfile;
use crate::constitutive::{FluidParams, SolidParams};
use crate::error::{Error, Result};

/// A fully specified case: geometry, materials, constraints, loads,
/// schedule and model choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseConfig {
    #[serde(default)]
    pub name: String,
    pub mesh: MeshConfig,
    pub solid: SolidParams,
    pub fluid: FluidParams,
    pub bc: BcConfig,
    pub load: LoadConfig,
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub model: ModelConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    /// Boundary regions cut in two at a given abscissa.
    #[serde(default)]
    pub splits: Vec<RegionSplit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSplit {
    pub region: String,
    pub x: f64,
    pub below: String,
    pub above: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcConfig {
    #[serde(default)]
    pub displacement: Vec<FixedDisplacement>,
    #[serde(default)]
    pub pressure: Vec<FixedPressure>,
}

/// One displacement component held fixed on a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedDisplacement {
    pub region: String,
    pub component: usize,
}

/// Drained boundary: pressure held at its initial value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPressure {
    pub region: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadConfig {
    /// Surface pressure magnitude, Pa.
    pub magnitude: f64,
    pub tractions: Vec<TractionConfig>,
    #[serde(default)]
    pub body_force: [f64; 2],
    #[serde(default)]
    pub fluid_force: [f64; 2],
    #[serde(default)]
    pub profile: LoadProfile,
}

/// Traction `magnitude · direction` on a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TractionConfig {
    pub region: String,
    pub direction: [f64; 2],
    #[serde(default)]
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub probes: Vec<ProbeConfig>,
    #[serde(default)]
    pub snapshots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub name: String,
    pub point: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Nonlinear,
    LinearBd,
    LinearNewmark,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default)]
    pub kind: ModelKind,
    #[serde(default = "default_beta")]
    pub newmark_beta: f64,
    #[serde(default = "default_gamma")]
    pub newmark_gamma: f64,
}

fn default_beta() -> f64 {
    0.25
}

fn default_gamma() -> f64 {
    0.5
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::default(),
            newmark_beta: default_beta(),
            newmark_gamma: default_gamma(),
        }
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be positive and finite, got {v}")))
    }
}

impl CaseConfig {
    /// Checks every value that can be checked without building the mesh.
    pub fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        if m.nx == 0 {
            return Err(Error::config("mesh.nx", "must be at least 1"));
        }
        if m.ny == 0 {
            return Err(Error::config("mesh.ny", "must be at least 1"));
        }
        positive("mesh.lx", m.lx)?;
        positive("mesh.ly", m.ly)?;
        self.solid.validate()?;
        self.fluid.validate()?;
        for f in &self.bc.displacement {
            if f.component > 1 {
                return Err(Error::config(
                    "bc.displacement.component",
                    format!("must be 0 or 1, got {}", f.component),
                ));
            }
        }
        let l = &self.load;
        if !l.magnitude.is_finite() {
            return Err(Error::config("load.magnitude", "must be finite"));
        }
        for t in &l.tractions {
            if !t.direction.iter().chain([&t.curvature]).all(|v| v.is_finite()) {
                return Err(Error::config("load.tractions", format!("non-finite entry on `{}`", t.region)));
            }
        }
        if !l.body_force.iter().chain(&l.fluid_force).all(|v| v.is_finite()) {
            return Err(Error::config("load.body_force", "must be finite"));
        }
        positive("schedule.dt", self.schedule.dt)?;
        if self.schedule.steps == 0 {
            return Err(Error::config("schedule.steps", "must be at least 1"));
        }
        for p in &self.schedule.probes {
            if !p.point.iter().all(|v| v.is_finite()) {
                return Err(Error::config("schedule.probes", format!("probe `{}` is not finite", p.name)));
            }
        }
        positive("model.newmark_beta", self.model.newmark_beta)?;
        positive("model.newmark_gamma", self.model.newmark_gamma)?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("case configuration is always serializable")
    }
}

/// Parses and validates a configuration held in memory; `origin` names it
/// in diagnostics.
pub fn parse_config(text: &str, origin: &Path) -> Result<CaseConfig> {
    let cfg: CaseConfig = toml::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        message: e.to_string().trim_end().replace('\n', " "),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn read_config(path: &Path) -> Result<CaseConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}
