use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Skeleton properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolidParams {
    /// First Lamé constant, Pa.
    pub lambda: f64,
    /// Shear modulus, Pa.
    pub mu: f64,
    /// Solid grain density, kg/m³.
    pub rho_s0: f64,
    /// Initial solid volume fraction.
    pub phi_s0: f64,
}

/// Pore-fluid and permeability properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidParams {
    /// Reference fluid density, kg/m³.
    pub rho_f0: f64,
    /// Fluid bulk modulus, Pa.
    pub kappa_f: f64,
    /// Reference pressure, Pa.
    pub p0: f64,
    /// Isotropic reference permeability, m²/(Pa·s).
    pub k0: f64,
    /// Exponent of the volumetric permeability law.
    pub varkappa: f64,
}

fn positive(section: &str, key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(
            format!("{section}.{key}"),
            format!("must be a positive finite number, got {v}"),
        ))
    }
}

impl SolidParams {
    pub fn validate(&self) -> Result<()> {
        positive("solid", "lambda", self.lambda)?;
        positive("solid", "mu", self.mu)?;
        positive("solid", "rho_s0", self.rho_s0)?;
        if !(self.phi_s0 > 0.0 && self.phi_s0 < 1.0) {
            return Err(Error::config(
                "solid.phi_s0",
                format!("must lie strictly between 0 and 1, got {}", self.phi_s0),
            ));
        }
        Ok(())
    }
}

impl FluidParams {
    /// Permeability `0.1 / (g ρ_f0)` corresponding to a hydraulic
    /// conductivity of 0.1 m/s.
    pub fn k0_from_conductivity(conductivity: f64, gravity: f64, rho_f0: f64) -> f64 {
        conductivity / (gravity * rho_f0)
    }

    pub fn validate(&self) -> Result<()> {
        positive("fluid", "rho_f0", self.rho_f0)?;
        positive("fluid", "kappa_f", self.kappa_f)?;
        positive("fluid", "k0", self.k0)?;
        positive("fluid", "varkappa", self.varkappa)?;
        if !self.p0.is_finite() {
            return Err(Error::config("fluid.p0", "must be finite"));
        }
        Ok(())
    }
}
