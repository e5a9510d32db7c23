use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::discretization::Mesh2D;
use crate::error::{Error, Result};

/// Time history shared by all loads of a case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LoadProfile {
    /// Zero at `t_0`, full magnitude from `t_0+` on.
    #[default]
    Heaviside,
    /// Full magnitude at every level, including `t_0`.
    Constant,
}

impl LoadProfile {
    /// Load multiplier at time level `k`.
    pub fn factor(self, k: usize) -> f64 {
        match self {
            LoadProfile::Heaviside if k == 0 => 0.0,
            _ => 1.0,
        }
    }

    /// Multiplier just after `t_0`.
    pub fn factor_initial(self) -> f64 {
        1.0
    }
}

/// Spatial Cauchy traction applied on one boundary region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TractionLoad {
    pub region: String,
    /// Traction vector at full magnitude, Pa.
    pub traction: [f64; 2],
    /// Mean curvature of the loaded surface, 1/m.
    #[serde(default)]
    pub curvature: f64,
}

/// All external loads of a case at unit multiplier.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LoadCase {
    pub tractions: Vec<TractionLoad>,
    /// Mixture body force per unit mass, m/s².
    #[serde(default)]
    pub body_force: [f64; 2],
    /// Fluid body force per unit mass, m/s².
    #[serde(default)]
    pub fluid_force: [f64; 2],
    #[serde(default)]
    pub profile: LoadProfile,
}

/// Load values at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadLevel {
    pub factor: f64,
    pub body_force: [f64; 2],
    pub fluid_force: [f64; 2],
}

impl LoadCase {
    pub fn validate(&self, mesh: &Mesh2D) -> Result<()> {
        for t in &self.tractions {
            mesh.region(&t.region)?;
            if !t.traction.iter().chain([&t.curvature]).all(|v| v.is_finite()) {
                return Err(Error::config(
                    "load.traction",
                    format!("non-finite traction on region `{}`", t.region),
                ));
            }
        }
        Ok(())
    }

    fn level_from_factor(&self, factor: f64) -> LoadLevel {
        LoadLevel {
            factor,
            body_force: self.body_force.map(|g| g * factor),
            fluid_force: self.fluid_force.map(|f| f * factor),
        }
    }

    /// Loads at time level `k`.
    pub fn at(&self, k: usize) -> LoadLevel {
        self.level_from_factor(self.profile.factor(k))
    }

    pub fn initial(&self) -> LoadLevel {
        self.level_from_factor(self.profile.factor_initial())
    }

    /// Average of levels `k` and `k + 1`.
    pub fn mid(&self, k: usize) -> LoadLevel {
        self.level_from_factor(0.5 * (self.profile.factor(k) + self.profile.factor(k + 1)))
    }

    /// Increment from level `k` to `k + 1`.
    pub fn increment(&self, k: usize) -> LoadLevel {
        self.level_from_factor(self.profile.factor(k + 1) - self.profile.factor(k))
    }

    /// Same loads scaled by `s`.
    pub fn scaled(&self, s: f64) -> LoadCase {
        let mut out = self.clone();
        for t in &mut out.tractions {
            t.traction = t.traction.map(|v| v * s);
        }
        out.body_force = out.body_force.map(|v| v * s);
        out.fluid_force = out.fluid_force.map(|v| v * s);
        out
    }
}

/// Prescribed increments of constrained degrees of freedom.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DirichletSet {
    u: BTreeMap<usize, f64>,
    p: BTreeMap<usize, f64>,
}

fn insert(map: &mut BTreeMap<usize, f64>, dof: usize, value: f64, what: &str) -> Result<()> {
    match map.get(&dof) {
        Some(&old) if old != value => Err(Error::InvalidInput(format!(
            "conflicting constraints on {what} dof {dof}: {old} and {value}"
        ))),
        _ => {
            map.insert(dof, value);
            Ok(())
        }
    }
}

impl DirichletSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Constrains displacement dof `2·node + component`.
    pub fn fix_u(&mut self, dof: usize, value: f64) -> Result<()> {
        insert(&mut self.u, dof, value, "displacement")
    }

    pub fn fix_p(&mut self, node: usize, value: f64) -> Result<()> {
        insert(&mut self.p, node, value, "pressure")
    }

    /// Constrains one displacement component on every node of a region.
    pub fn fix_region_u(&mut self, mesh: &Mesh2D, region: &str, component: usize, value: f64) -> Result<()> {
        if component > 1 {
            return Err(Error::InvalidInput(format!("component {component} out of range")));
        }
        for n in mesh.region_q2_nodes(region)? {
            self.fix_u(2 * n + component, value)?;
        }
        Ok(())
    }

    pub fn fix_region_p(&mut self, mesh: &Mesh2D, region: &str, value: f64) -> Result<()> {
        for n in mesh.region_q1_nodes(region)? {
            self.fix_p(n, value)?;
        }
        Ok(())
    }

    pub fn u_constraints(&self) -> &BTreeMap<usize, f64> {
        &self.u
    }

    pub fn p_constraints(&self) -> &BTreeMap<usize, f64> {
        &self.p
    }

    /// Same constrained set with every prescribed value set to zero.
    pub fn homogeneous(&self) -> DirichletSet {
        DirichletSet {
            u: self.u.keys().map(|&k| (k, 0.0)).collect(),
            p: self.p.keys().map(|&k| (k, 0.0)).collect(),
        }
    }

    pub fn u_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        self.u.keys().for_each(|&k| m[k] = true);
        m
    }

    pub fn p_mask(&self, n: usize) -> Vec<bool> {
        let mut m = vec![false; n];
        self.p.keys().for_each(|&k| m[k] = true);
        m
    }

    pub fn check_bounds(&self, n_u: usize, n_p: usize) -> Result<()> {
        if let Some((&k, _)) = self.u.iter().next_back().filter(|(&k, _)| k >= n_u) {
            return Err(Error::InvalidInput(format!("displacement dof {k} out of range")));
        }
        if let Some((&k, _)) = self.p.iter().next_back().filter(|(&k, _)| k >= n_p) {
            return Err(Error::InvalidInput(format!("pressure dof {k} out of range")));
        }
        Ok(())
    }

    /// Zeroes constrained entries of a displacement-sized vector.
    pub fn zero_u(&self, v: &mut [f64]) {
        self.u.keys().for_each(|&k| v[k] = 0.0);
    }

    pub fn zero_p(&self, v: &mut [f64]) {
        self.p.keys().for_each(|&k| v[k] = 0.0);
    }
}
