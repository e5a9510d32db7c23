//! Time integration: start-up, the two-solve predictor–corrector step and
//! the driver loop producing probe time series.

mod run;
mod solver;

pub use run::{run, Probe, RunResult, Snapshot, StepRecord, TimeStepper};
pub use solver::{solve_block, solve_masked, solve_sparse};

use crate::assembly::{apply_dirichlet, Assembler, DirichletSet, Increments, LoadCase};
use crate::discretization::Mesh2D;
use crate::error::{Error, Result};

/// Uniform time grid and output requests.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub dt: f64,
    pub n_steps: usize,
    pub probes: Vec<Probe>,
    /// Steps after which full fields are kept.
    pub snapshots: Vec<usize>,
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("schedule.dt", format!("must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::config("schedule.steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// State carried from `t_k` to `t_{k+1}`: the configuration `Ω_k` (whose
/// current coordinates hold the total displacement), the total pressure and
/// the last two displacement increments.
#[derive(Debug, Clone)]
pub struct History {
    pub k: usize,
    pub time: f64,
    pub mesh: Mesh2D,
    pub p: Vec<f64>,
    pub du: Vec<f64>,
    pub du_prev: Vec<f64>,
    pub dp: Vec<f64>,
    /// Mid-step configuration of the last step, if one was taken.
    pub mid_mesh: Option<Mesh2D>,
}

impl History {
    pub fn u_total(&self) -> Vec<f64> {
        self.mesh.displacement()
    }

    /// Backward-difference estimate `(δu^k − δu^{k−1})/δt²` of `ü(t_k)`.
    pub fn acceleration(&self, dt: f64) -> Vec<f64> {
        self.du
            .iter()
            .zip(&self.du_prev)
            .map(|(a, b)| (a - b) / (dt * dt))
            .collect()
    }
}

/// Consistent rates at `t = 0+`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialRates {
    pub accel: Vec<f64>,
    pub pressure_rate: Vec<f64>,
    /// Mixture mass matrix used for the acceleration solve.
    pub mass: crate::assembly::CsrMatrix,
}

/// Intermediate solutions of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepParts {
    pub u_pred: Vec<f64>,
    pub p_pred: Vec<f64>,
    pub u_corr: Vec<f64>,
    pub p_corr: Vec<f64>,
}

/// Finite-strain predictor–corrector integrator for one case.
#[derive(Debug, Clone)]
pub struct Integrator {
    assembler: Assembler,
    loads: LoadCase,
    bc: DirichletSet,
    dt: f64,
}

fn average(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect()
}

fn axpy(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

impl Integrator {
    pub fn new(assembler: Assembler, loads: LoadCase, bc: DirichletSet, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        bc.check_bounds(assembler.n_u(), assembler.n_p())?;
        Ok(Self {
            assembler,
            loads,
            bc,
            dt,
        })
    }

    pub fn assembler(&self) -> &Assembler {
        &self.assembler
    }

    pub fn loads(&self) -> &LoadCase {
        &self.loads
    }

    pub fn dirichlet(&self) -> &DirichletSet {
        &self.bc
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Solves for `ü` and `ṗ` at `t = 0+` on the configuration carrying the
    /// initial displacement.
    pub fn initial_rates(&self, mesh: &Mesh2D, v0: &[f64], p0: &[f64]) -> Result<InitialRates> {
        let init = self.assembler.assemble_initial(mesh, v0, p0, &self.loads)?;
        let accel = solve_masked(&init.mass, &init.accel_rhs, &self.bc.u_mask(self.assembler.n_u()), 0)?;
        let pmask = self.bc.p_mask(self.assembler.n_p());
        if init.compressibility.values().iter().all(|&v| v == 0.0) {
            return Err(Error::Singular("compressibility matrix vanishes".into()));
        }
        let pressure_rate = solve_masked(&init.compressibility, &init.pressure_rhs(&accel), &pmask, 0)?;
        Ok(InitialRates {
            accel,
            pressure_rate,
            mass: init.mass,
        })
    }

    /// History at `t_0` with `ū⁰ = v₀δt`, `ū^{−1} = ū⁰ − ü^{0+}δt²` and
    /// `p̄ = ṗ^{0+}δt`.
    pub fn initialize(&self, mesh0: &Mesh2D, u0: &[f64], v0: &[f64], p0: &[f64]) -> Result<History> {
        let mesh = mesh0.with_displacement(u0)?;
        let rates = self.initial_rates(&mesh, v0, p0)?;
        let dt = self.dt;
        let du: Vec<f64> = v0.iter().map(|v| v * dt).collect();
        let du_prev = axpy(&du, -dt * dt, &rates.accel);
        let dp = rates.pressure_rate.iter().map(|r| r * dt).collect();
        Ok(History {
            k: 0,
            time: 0.0,
            mesh,
            p: p0.to_vec(),
            du,
            du_prev,
            dp,
            mid_mesh: None,
        })
    }

    /// Advances one step and returns the intermediate solves as well.
    pub fn step_parts(&self, h: &History) -> Result<(History, StepParts)> {
        let dt = self.dt;
        let step = h.k + 1;
        let inc = Increments {
            du: &h.du,
            du_prev: &h.du_prev,
            dp: &h.dp,
        };
        let pred = self
            .assembler
            .assemble_predictor(&h.mesh, &h.p, &inc, &self.loads, h.k, dt)
            .map_err(|e| at_step(e, step))?;
        let (u_pred, p_pred) = solve_block(&apply_dirichlet(pred, &self.bc)?, step)?;

        let mid_mesh = h.mesh.update_coordinates(&u_pred.iter().map(|v| 0.5 * v).collect::<Vec<_>>())
            .map_err(|e| at_step(e, step))?;
        let p_mid = axpy(&h.p, 0.5, &p_pred);
        let corr = self
            .assembler
            .assemble_corrector(&h.mesh, &h.p, &mid_mesh, &p_mid, &u_pred, &p_pred, &inc, &self.loads, h.k, dt)
            .map_err(|e| at_step(e, step))?;
        let (u_corr, p_corr) = solve_block(&apply_dirichlet(corr, &self.bc)?, step)?;

        let du = average(&u_pred, &u_corr);
        let dp = average(&p_pred, &p_corr);
        let mesh = h.mesh.update_coordinates(&du).map_err(|e| at_step(e, step))?;
        let p = axpy(&h.p, 1.0, &dp);
        let next = History {
            k: step,
            time: step as f64 * dt,
            mesh,
            p,
            du_prev: h.du.clone(),
            du,
            dp,
            mid_mesh: Some(mid_mesh),
        };
        Ok((
            next,
            StepParts {
                u_pred,
                p_pred,
                u_corr,
                p_corr,
            },
        ))
    }

    pub fn step(&self, h: &History) -> Result<History> {
        self.step_parts(h).map(|(next, _)| next)
    }
}

fn at_step(e: Error, step: usize) -> Error {
    match e {
        Error::InvertedElement { .. } | Error::NonPhysical(_) => Error::Solver {
            step,
            message: e.to_string(),
        },
        other => other,
    }
}

/// Nonlinear integrator paired with its current history.
#[derive(Debug, Clone)]
pub struct NonlinearStepper {
    pub integrator: Integrator,
    pub history: History,
}

impl NonlinearStepper {
    /// Starts from rest with zero initial pressure.
    pub fn from_rest(integrator: Integrator, mesh0: &Mesh2D) -> Result<Self> {
        let nu = integrator.assembler.n_u();
        let np = integrator.assembler.n_p();
        let zero_u = vec![0.0; nu];
        let history = integrator.initialize(mesh0, &zero_u, &zero_u, &vec![0.0; np])?;
        Ok(Self { integrator, history })
    }
}

impl TimeStepper for NonlinearStepper {
    fn advance(&mut self) -> Result<()> {
        self.history = self.integrator.step(&self.history)?;
        Ok(())
    }

    fn time(&self) -> f64 {
        self.history.time
    }

    fn step_index(&self) -> usize {
        self.history.k
    }

    fn displacement(&self) -> Vec<f64> {
        self.history.u_total()
    }

    fn pressure(&self) -> Vec<f64> {
        self.history.p.clone()
    }

    fn acceleration(&self) -> Vec<f64> {
        self.history.acceleration(self.integrator.dt)
    }
}
