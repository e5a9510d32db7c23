//! Built-in benchmark cases and the translation of a case description
//! into a runnable problem.

use crate::assembly::{Assembler, DirichletSet, LoadCase, LoadProfile, TractionLoad};
use crate::constitutive::{FluidParams, SolidParams};
use crate::discretization::{build_structured_grid, Mesh2D};
use crate::error::{Error, Result};
use crate::postproc::{
    BcConfig, CaseConfig, FixedDisplacement, FixedPressure, LoadConfig, MeshConfig, ModelConfig,
    ModelKind, ProbeConfig, RegionSplit, ScheduleConfig, TractionConfig,
};
use crate::reference::{LinearBiotSystem, LinearScheme, LinearStepper, NewmarkParams};
use crate::stepping::{run, Integrator, NonlinearStepper, Probe, RunResult, Schedule, TimeStepper};

/// Gravitational acceleration used to convert hydraulic conductivity.
const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum BuiltinCase {
    /// Confined 1×10 m column loaded on its drained top.
    Compression,
    /// 10×10 m block loaded on the right half of its top.
    PartialCompression,
}

impl BuiltinCase {
    pub fn config(self) -> CaseConfig {
        match self {
            BuiltinCase::Compression => compression(),
            BuiltinCase::PartialCompression => partial_compression(),
        }
    }
}

fn fluid() -> FluidParams {
    FluidParams {
        rho_f0: 1000.0,
        kappa_f: 22e9,
        p0: 0.0,
        k0: FluidParams::k0_from_conductivity(0.1, GRAVITY, 1000.0),
        varkappa: 0.8,
    }
}

fn rollers() -> Vec<FixedDisplacement> {
    [("left", 0), ("right", 0), ("bottom", 1)]
        .into_iter()
        .map(|(region, component)| FixedDisplacement {
            region: region.into(),
            component,
        })
        .collect()
}

/// Oedometric compression of a 1×10 m column: rollers on the sides and
/// bottom, drained top loaded by 40 kPa.
pub fn compression() -> CaseConfig {
    CaseConfig {
        name: "compression".into(),
        mesh: MeshConfig {
            nx: 1,
            ny: 10,
            lx: 1.0,
            ly: 10.0,
            splits: vec![],
        },
        solid: SolidParams {
            lambda: 29e6,
            mu: 7e6,
            rho_s0: 2700.0,
            phi_s0: 0.58,
        },
        fluid: fluid(),
        bc: BcConfig {
            displacement: rollers(),
            pressure: vec![FixedPressure { region: "top".into() }],
        },
        load: LoadConfig {
            magnitude: 40e3,
            tractions: vec![TractionConfig {
                region: "top".into(),
                direction: [0.0, -1.0],
                curvature: 0.0,
            }],
            body_force: [0.0; 2],
            fluid_force: [0.0; 2],
            profile: LoadProfile::Heaviside,
        },
        schedule: ScheduleConfig {
            dt: 0.01,
            steps: 60,
            probes: vec![ProbeConfig {
                name: "top".into(),
                point: [0.5, 10.0],
            }],
            snapshots: vec![60],
        },
        model: ModelConfig::default(),
    }
}

/// 10×10 m block with the right half of the top loaded by 4 MPa and the
/// left half drained.
pub fn partial_compression() -> CaseConfig {
    let probe = |name: &str, point| ProbeConfig {
        name: name.into(),
        point,
    };
    CaseConfig {
        name: "partial_compression".into(),
        mesh: MeshConfig {
            nx: 10,
            ny: 10,
            lx: 10.0,
            ly: 10.0,
            splits: vec![RegionSplit {
                region: "top".into(),
                x: 5.0,
                below: "top_left".into(),
                above: "top_right".into(),
            }],
        },
        solid: SolidParams {
            lambda: 8.4e6,
            mu: 5.6e6,
            rho_s0: 2700.0,
            phi_s0: 0.58,
        },
        fluid: fluid(),
        bc: BcConfig {
            displacement: rollers(),
            pressure: vec![FixedPressure {
                region: "top_left".into(),
            }],
        },
        load: LoadConfig {
            magnitude: 4e6,
            tractions: vec![TractionConfig {
                region: "top_right".into(),
                direction: [0.0, -1.0],
                curvature: 0.0,
            }],
            body_force: [0.0; 2],
            fluid_force: [0.0; 2],
            profile: LoadProfile::Heaviside,
        },
        schedule: ScheduleConfig {
            dt: 0.005,
            steps: 100,
            probes: vec![
                probe("L", [0.0, 10.0]),
                probe("R", [10.0, 10.0]),
                probe("C", [5.0, 5.0]),
            ],
            snapshots: vec![20, 100],
        },
        model: ModelConfig::default(),
    }
}

/// A validated case ready to run.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: CaseConfig,
    pub mesh: Mesh2D,
    pub loads: LoadCase,
    pub bc: DirichletSet,
    pub schedule: Schedule,
}

impl Problem {
    pub fn from_config(config: &CaseConfig) -> Result<Self> {
        config.validate()?;
        let m = &config.mesh;
        let mut mesh = build_structured_grid(m.nx, m.ny, m.lx, m.ly)?;
        for s in &m.splits {
            mesh.split_region_at_x(&s.region, s.x, &s.below, &s.above)
                .map_err(|e| Error::config("mesh.splits", e.to_string()))?;
        }
        let mut bc = DirichletSet::new();
        for f in &config.bc.displacement {
            bc.fix_region_u(&mesh, &f.region, f.component, 0.0)
                .map_err(|e| Error::config("bc.displacement", e.to_string()))?;
        }
        for f in &config.bc.pressure {
            bc.fix_region_p(&mesh, &f.region, 0.0)
                .map_err(|e| Error::config("bc.pressure", e.to_string()))?;
        }
        let l = &config.load;
        let loads = LoadCase {
            tractions: l
                .tractions
                .iter()
                .map(|t| TractionLoad {
                    region: t.region.clone(),
                    traction: t.direction.map(|d| d * l.magnitude),
                    curvature: t.curvature,
                })
                .collect(),
            body_force: l.body_force,
            fluid_force: l.fluid_force,
            profile: l.profile,
        };
        loads
            .validate(&mesh)
            .map_err(|e| Error::config("load.tractions", e.to_string()))?;
        let s = &config.schedule;
        let schedule = Schedule {
            dt: s.dt,
            n_steps: s.steps,
            probes: s.probes.iter().map(|p| Probe::new(p.name.clone(), p.point)).collect(),
            snapshots: s.snapshots.clone(),
        };
        for p in &schedule.probes {
            if mesh.locate_initial(p.point).is_none() {
                return Err(Error::config(
                    "schedule.probes",
                    format!("probe `{}` at {:?} lies outside the mesh", p.name, p.point),
                ));
            }
        }
        Ok(Self {
            config: config.clone(),
            mesh,
            loads,
            bc,
            schedule,
        })
    }

    pub fn assembler(&self) -> Result<Assembler> {
        Assembler::new(&self.mesh, self.config.solid, self.config.fluid)
    }

    pub fn newmark(&self) -> NewmarkParams {
        NewmarkParams {
            beta: self.config.model.newmark_beta,
            gamma: self.config.model.newmark_gamma,
        }
    }

    /// Stepper for the configured model, initialized at `t_0`.
    pub fn stepper(&self) -> Result<Box<dyn TimeStepper>> {
        let dt = self.schedule.dt;
        let c = &self.config;
        let linear = |scheme| -> Result<Box<dyn TimeStepper>> {
            let sys = LinearBiotSystem::assemble(&self.mesh, &c.solid, &c.fluid, &self.loads, &self.bc)?;
            Ok(Box::new(LinearStepper::new(sys, scheme, dt)?))
        };
        match c.model.kind {
            ModelKind::Nonlinear => {
                let integ = Integrator::new(self.assembler()?, self.loads.clone(), self.bc.clone(), dt)?;
                Ok(Box::new(NonlinearStepper::from_rest(integ, &self.mesh)?))
            }
            ModelKind::LinearBd => linear(LinearScheme::BackwardDifference),
            ModelKind::LinearNewmark => linear(LinearScheme::Newmark(self.newmark())),
        }
    }

    /// Runs the configured model over the whole schedule. Setup failures
    /// are returned as errors; failures during stepping are stored in the
    /// result next to the records produced before them.
    pub fn run(&self) -> Result<RunResult> {
        let assembler = self.assembler()?;
        let mut stepper = self.stepper()?;
        Ok(run(
            stepper.as_mut(),
            &assembler,
            &self.mesh,
            &self.schedule,
            self.loads.fluid_force,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_match_published_parameters() {
        let c = compression();
        assert_eq!((c.solid.lambda, c.solid.mu), (29e6, 7e6));
        assert_eq!((c.solid.rho_s0, c.solid.phi_s0), (2700.0, 0.58));
        assert_eq!((c.fluid.rho_f0, c.fluid.kappa_f, c.fluid.varkappa), (1000.0, 22e9, 0.8));
        assert_eq!((c.load.magnitude, c.schedule.dt), (40e3, 0.01));
        let c = partial_compression();
        assert_eq!((c.solid.lambda, c.solid.mu), (8.4e6, 5.6e6));
        assert_eq!((c.load.magnitude, c.schedule.dt), (4e6, 0.005));
    }

    #[test]
    fn builtins_build() {
        let p = Problem::from_config(&compression()).unwrap();
        assert_eq!(p.bc.u_constraints().len(), 45);
        assert_eq!(p.bc.p_constraints().len(), 2);
        let p = Problem::from_config(&partial_compression()).unwrap();
        assert_eq!(p.bc.p_constraints().len(), 6);
        assert_eq!(p.schedule.probes.len(), 3);
    }

    #[test]
    fn bad_region_names_the_key() {
        let mut c = compression();
        c.bc.pressure[0].region = "lid".into();
        let e = Problem::from_config(&c).unwrap_err().to_string();
        assert!(e.contains("bc.pressure"), "{e}");
        let mut c = compression();
        c.schedule.probes[0].point = [5.0, 5.0];
        assert!(Problem::from_config(&c).is_err());
    }
}
