//! Infinitesimal-strain Biot model on the reference mesh, assembled with
//! Voigt notation independently of the finite-strain kernels.

use crate::assembly::{apply_dirichlet, BlockPatterns, BlockSystem, CsrMatrix, DirichletSet, LoadCase};
use crate::constitutive::{FluidParams, SolidParams};
use crate::discretization::{LineRule, Mesh2D, QuadratureRule};
use crate::error::{Error, Result};
use crate::stepping::{solve_block, solve_masked, TimeStepper};

/// Constant operators of the linear problem plus unit-factor load vectors.
#[derive(Debug, Clone)]
pub struct LinearBiotSystem {
    pub mass: CsrMatrix,
    pub stiffness: CsrMatrix,
    /// `∫ψ ∇·v`, displacement rows.
    pub coupling: CsrMatrix,
    /// Transpose of `coupling`, pressure rows.
    pub coupling_t: CsrMatrix,
    pub dynamic_darcy: CsrMatrix,
    pub permeability: CsrMatrix,
    pub compressibility: CsrMatrix,
    /// Solid force vector at unit load factor.
    pub force: Vec<f64>,
    /// `∫ρ_f k f·∇ψ` at unit load factor.
    pub fluid_load: Vec<f64>,
    loads: LoadCase,
    bc: DirichletSet,
}

fn plane_strain_matrix(solid: &SolidParams) -> [[f64; 3]; 3] {
    let (l, m) = (solid.lambda, solid.mu);
    [[l + 2.0 * m, l, 0.0], [l, l + 2.0 * m, 0.0], [0.0, 0.0, m]]
}

/// Strain-displacement rows `[ε_xx, ε_yy, γ_xy]` for one node's `(x, y)` dofs.
fn strain_rows(g: [f64; 2]) -> [[f64; 2]; 3] {
    [[g[0], 0.0], [0.0, g[1]], [g[1], g[0]]]
}

impl LinearBiotSystem {
    pub fn assemble(
        mesh: &Mesh2D,
        solid: &SolidParams,
        fluid: &FluidParams,
        loads: &LoadCase,
        bc: &DirichletSet,
    ) -> Result<Self> {
        solid.validate()?;
        fluid.validate()?;
        loads.validate(mesh)?;
        let mesh = mesh.with_displacement(&vec![0.0; 2 * mesh.n_q2_nodes()])?;
        let pat = BlockPatterns::new(&mesh);
        bc.check_bounds(pat.n_u(), pat.n_p())?;
        let mut mass = CsrMatrix::zeros(pat.uu.clone());
        let mut stiffness = CsrMatrix::zeros(pat.uu.clone());
        let mut coupling = CsrMatrix::zeros(pat.up.clone());
        let mut coupling_t = CsrMatrix::zeros(pat.pu.clone());
        let mut dynamic_darcy = CsrMatrix::zeros(pat.pu.clone());
        let mut permeability = CsrMatrix::zeros(pat.pp.clone());
        let mut compressibility = CsrMatrix::zeros(pat.pp.clone());
        let mut force = vec![0.0; pat.n_u()];
        let mut fluid_load = vec![0.0; pat.n_p()];

        let dmat = plane_strain_matrix(solid);
        let porosity = 1.0 - solid.phi_s0;
        let rho_f = fluid.rho_f0;
        let rho = porosity * rho_f + solid.phi_s0 * solid.rho_s0;
        let modulus = porosity / fluid.kappa_f;
        let k0 = fluid.k0;
        let rule = QuadratureRule::volume_default();

        for (e, el) in mesh.elements().iter().enumerate() {
            for (xi, &w) in rule.points.iter().zip(&rule.weights) {
                let kin = mesh.kinematics(e, *xi, w)?;
                let dv = kin.dv;
                for a in 0..9 {
                    let ba = strain_rows(kin.grad2[a]);
                    for b in 0..9 {
                        let bb = strain_rows(kin.grad2[b]);
                        for i in 0..2 {
                            let r = 2 * el.q2[a] + i;
                            mass.add(r, 2 * el.q2[b] + i, rho * kin.n2[a] * kin.n2[b] * dv);
                            for j in 0..2 {
                                let mut s = 0.0;
                                for m in 0..3 {
                                    for n in 0..3 {
                                        s += ba[m][i] * dmat[m][n] * bb[n][j];
                                    }
                                }
                                stiffness.add(r, 2 * el.q2[b] + j, s * dv);
                            }
                        }
                    }
                    for i in 0..2 {
                        force[2 * el.q2[a] + i] += rho * loads.body_force[i] * kin.n2[a] * dv;
                    }
                }
                for (c, &pc) in el.q1.iter().enumerate() {
                    let gc = kin.grad1[c];
                    for a in 0..9 {
                        for i in 0..2 {
                            let u = 2 * el.q2[a] + i;
                            let div = kin.n1[c] * kin.grad2[a][i] * dv;
                            coupling.add(u, pc, div);
                            coupling_t.add(pc, u, div);
                            dynamic_darcy.add(pc, u, rho_f * k0 * gc[i] * kin.n2[a] * dv);
                        }
                    }
                    for (d, &pd) in el.q1.iter().enumerate() {
                        let gd = kin.grad1[d];
                        permeability.add(pc, pd, k0 * (gc[0] * gd[0] + gc[1] * gd[1]) * dv);
                        compressibility.add(pc, pd, modulus * kin.n1[c] * kin.n1[d] * dv);
                    }
                    fluid_load[pc] += rho_f
                        * k0
                        * (loads.fluid_force[0] * gc[0] + loads.fluid_force[1] * gc[1])
                        * dv;
                }
            }
        }

        let line = LineRule::gauss(3)?;
        for t in &loads.tractions {
            for edge in mesh.region(&t.region)? {
                for (&s, &w) in line.points.iter().zip(&line.weights) {
                    let g = mesh.edge_geometry(edge, s);
                    for (m, &n) in edge.q2.iter().enumerate() {
                        for i in 0..2 {
                            force[2 * n + i] += w * g.jacobian * g.shape[m] * t.traction[i];
                        }
                    }
                }
            }
        }

        Ok(Self {
            mass,
            stiffness,
            coupling,
            coupling_t,
            dynamic_darcy,
            permeability,
            compressibility,
            force,
            fluid_load,
            loads: loads.clone(),
            bc: bc.clone(),
        })
    }

    pub fn n_u(&self) -> usize {
        self.force.len()
    }

    pub fn n_p(&self) -> usize {
        self.fluid_load.len()
    }

    pub fn dirichlet(&self) -> &DirichletSet {
        &self.bc
    }

    fn force_at(&self, factor: f64) -> Vec<f64> {
        self.force.iter().map(|f| f * factor).collect()
    }

    /// `F − A u + B p` at load factor `factor`.
    fn out_of_balance(&self, factor: f64, u: &[f64], p: &[f64]) -> Vec<f64> {
        let mut r = self.force_at(factor);
        self.stiffness.mul_vec_add(-1.0, u, &mut r);
        self.coupling.mul_vec_add(1.0, p, &mut r);
        r
    }

    /// Unconstrained backward-difference system for the increments from
    /// `t_k` to `t_{k+1}`.
    pub fn bd_system(&self, state: &LinearState, dt: f64) -> BlockSystem {
        let k = state.k;
        let factor = self.loads.profile.factor(k + 1);
        let dt2 = dt * dt;
        let mut f = self.out_of_balance(factor, &state.u, &state.p);
        self.mass.mul_vec_add(1.0 / dt2, &state.du, &mut f);
        let mut g: Vec<f64> = self.fluid_load.iter().map(|v| dt * factor * v).collect();
        self.permeability.mul_vec_add(-dt, &state.p, &mut g);
        self.dynamic_darcy.mul_vec_add(1.0 / dt, &state.du, &mut g);
        BlockSystem {
            dt,
            muu: self.mass.clone(),
            auu: self.stiffness.clone(),
            bup: self.coupling.clone(),
            cpu: self.coupling_t.clone(),
            npu: self.dynamic_darcy.clone(),
            kpp: self.permeability.clone(),
            dpp: self.compressibility.clone(),
            f,
            g,
        }
    }

    /// Unconstrained Newmark system for the increments; the pressure rate is
    /// the backward difference `(p^{k+1} − p^k)/δt`.
    pub fn newmark_system(&self, state: &LinearState, dt: f64, nm: NewmarkParams) -> BlockSystem {
        let factor = self.loads.profile.factor(state.k + 1);
        let a_pred: Vec<f64> = state
            .velocity
            .iter()
            .zip(&state.accel)
            .map(|(&v, &a)| nm.predicted_accel(v, a, dt))
            .collect();
        let mut f = self.out_of_balance(factor, &state.u, &state.p);
        self.mass.mul_vec_add(-1.0, &a_pred, &mut f);

        // velocity at t_{k+1} without the increment contribution
        let v_known: Vec<f64> = state
            .velocity
            .iter()
            .zip(&state.accel)
            .zip(&a_pred)
            .map(|((&v, &a), &ap)| nm.velocity(v, a, ap, dt))
            .collect();
        let mut g: Vec<f64> = self.fluid_load.iter().map(|v| dt * factor * v).collect();
        self.permeability.mul_vec_add(-dt, &state.p, &mut g);
        self.coupling_t.mul_vec_add(-dt, &v_known, &mut g);
        self.dynamic_darcy.mul_vec_add(-dt, &a_pred, &mut g);

        let scaled = |m: &CsrMatrix, s: f64| {
            let mut out = CsrMatrix::zeros(m.pattern().clone());
            for (r, c, v) in m.triplets() {
                out.add(r, c, s * v);
            }
            out
        };
        BlockSystem {
            dt,
            muu: scaled(&self.mass, 1.0 / nm.beta),
            auu: self.stiffness.clone(),
            bup: self.coupling.clone(),
            cpu: scaled(&self.coupling_t, nm.gamma / nm.beta),
            npu: scaled(&self.dynamic_darcy, 1.0 / nm.beta),
            kpp: self.permeability.clone(),
            dpp: self.compressibility.clone(),
            f,
            g,
        }
    }

    /// Rest state at `t_0` with the consistent acceleration at `0+`.
    pub fn initial_state(&self) -> Result<LinearState> {
        let (nu, np) = (self.n_u(), self.n_p());
        let zero_u = vec![0.0; nu];
        let rhs = self.out_of_balance(self.loads.profile.factor_initial(), &zero_u, &vec![0.0; np]);
        let accel = solve_masked(&self.mass, &rhs, &self.bc.u_mask(nu), 0)?;
        Ok(LinearState {
            k: 0,
            u: zero_u.clone(),
            p: vec![0.0; np],
            du: zero_u.clone(),
            du_prev: zero_u.clone(),
            velocity: zero_u,
            accel,
        })
    }

    /// One backward-difference step.
    pub fn step_bd(&self, state: &LinearState, dt: f64) -> Result<LinearState> {
        let sys = apply_dirichlet(self.bd_system(state, dt), &self.bc)?;
        let (du, dp) = solve_block(&sys, state.k + 1)?;
        let accel = du
            .iter()
            .zip(&state.du)
            .map(|(a, b)| (a - b) / (dt * dt))
            .collect();
        Ok(state.advanced(du, dp, accel, dt))
    }

    /// One Newmark step.
    pub fn step_newmark(&self, state: &LinearState, dt: f64, nm: NewmarkParams) -> Result<LinearState> {
        let sys = apply_dirichlet(self.newmark_system(state, dt, nm), &self.bc)?;
        let (du, dp) = solve_block(&sys, state.k + 1)?;
        let accel: Vec<f64> = du
            .iter()
            .zip(state.velocity.iter().zip(&state.accel))
            .map(|(&d, (&v, &a))| nm.accel(d, v, a, dt))
            .collect();
        let mut next = state.advanced(du, dp, accel, dt);
        next.velocity = state
            .velocity
            .iter()
            .zip(&state.accel)
            .zip(&next.accel)
            .map(|((&v, &a), &an)| nm.velocity(v, a, an, dt))
            .collect();
        Ok(next)
    }
}

/// State of the linear model at `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearState {
    pub k: usize,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    /// `u^k − u^{k−1}`.
    pub du: Vec<f64>,
    pub du_prev: Vec<f64>,
    pub velocity: Vec<f64>,
    pub accel: Vec<f64>,
}

impl LinearState {
    fn advanced(&self, du: Vec<f64>, dp: Vec<f64>, accel: Vec<f64>, dt: f64) -> LinearState {
        LinearState {
            k: self.k + 1,
            u: self.u.iter().zip(&du).map(|(a, b)| a + b).collect(),
            p: self.p.iter().zip(&dp).map(|(a, b)| a + b).collect(),
            velocity: du.iter().map(|d| d / dt).collect(),
            du_prev: self.du.clone(),
            du,
            accel,
        }
    }
}

/// Newmark parameters; `β = 1/4`, `γ = 1/2` is the trapezoidal rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewmarkParams {
    pub beta: f64,
    pub gamma: f64,
}

impl Default for NewmarkParams {
    fn default() -> Self {
        Self {
            beta: 0.25,
            gamma: 0.5,
        }
    }
}

impl NewmarkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::config("model.newmark_beta", format!("must be positive, got {}", self.beta)));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::config("model.newmark_gamma", format!("must be positive, got {}", self.gamma)));
        }
        Ok(())
    }

    /// Part of `a^{k+1}` known before the increment is solved.
    pub fn predicted_accel(&self, v: f64, a: f64, dt: f64) -> f64 {
        -(v / (self.beta * dt) + (0.5 / self.beta - 1.0) * a)
    }

    /// `a^{k+1}` from the displacement increment.
    pub fn accel(&self, du: f64, v: f64, a: f64, dt: f64) -> f64 {
        du / (self.beta * dt * dt) + self.predicted_accel(v, a, dt)
    }

    pub fn velocity(&self, v: f64, a: f64, a_next: f64, dt: f64) -> f64 {
        v + dt * ((1.0 - self.gamma) * a + self.gamma * a_next)
    }
}

/// Which time integrator drives a [`LinearStepper`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearScheme {
    BackwardDifference,
    Newmark(NewmarkParams),
}

#[derive(Debug, Clone)]
pub struct LinearStepper {
    pub system: LinearBiotSystem,
    pub state: LinearState,
    pub scheme: LinearScheme,
    pub dt: f64,
}

impl LinearStepper {
    pub fn new(system: LinearBiotSystem, scheme: LinearScheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
        }
        if let LinearScheme::Newmark(nm) = scheme {
            nm.validate()?;
        }
        let state = system.initial_state()?;
        Ok(Self {
            system,
            state,
            scheme,
            dt,
        })
    }
}

impl TimeStepper for LinearStepper {
    fn advance(&mut self) -> Result<()> {
        self.state = match self.scheme {
            LinearScheme::BackwardDifference => self.system.step_bd(&self.state, self.dt)?,
            LinearScheme::Newmark(nm) => self.system.step_newmark(&self.state, self.dt, nm)?,
        };
        Ok(())
    }

    fn time(&self) -> f64 {
        self.state.k as f64 * self.dt
    }

    fn step_index(&self) -> usize {
        self.state.k
    }

    fn displacement(&self) -> Vec<f64> {
        self.state.u.clone()
    }

    fn pressure(&self) -> Vec<f64> {
        self.state.p.clone()
    }

    fn acceleration(&self) -> Vec<f64> {
        self.state.accel.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretization::build_structured_grid;

    fn params() -> (SolidParams, FluidParams) {
        (
            SolidParams {
                lambda: 29e6,
                mu: 7e6,
                rho_s0: 2700.0,
                phi_s0: 0.58,
            },
            FluidParams {
                rho_f0: 1000.0,
                kappa_f: 22e9,
                p0: 0.0,
                k0: 1e-5,
                varkappa: 0.8,
            },
        )
    }

    #[test]
    fn stiffness_is_symmetric_and_rigid_modes_are_free() {
        let mesh = build_structured_grid(2, 2, 1.0, 1.0).unwrap();
        let (s, f) = params();
        let sys = LinearBiotSystem::assemble(&mesh, &s, &f, &LoadCase::default(), &DirichletSet::new()).unwrap();
        assert!(sys.stiffness.asymmetry() < 1e-14);
        let n = mesh.n_q2_nodes();
        let translate: Vec<f64> = (0..n).flat_map(|_| [1.0, 0.0]).collect();
        let coords = mesh.initial_coords();
        let rotate: Vec<f64> = coords.iter().flat_map(|x| [-x.y, x.x]).collect();
        for mode in [translate, rotate] {
            let r = sys.stiffness.mul_vec(&mode);
            assert!(r.iter().all(|v| v.abs() < 1e-6), "{r:?}");
        }
        // coupling transpose and mass total
        for (r, c, v) in sys.coupling.triplets() {
            assert_eq!(v, sys.coupling_t.get(c, r));
        }
        let ones: Vec<f64> = (0..n).flat_map(|_| [1.0, 0.0]).collect();
        let total: f64 = sys.mass.mul_vec(&ones).iter().sum();
        let rho = 0.42 * 1000.0 + 0.58 * 2700.0;
        assert!((total - rho).abs() < 1e-9 * rho);
    }

    #[test]
    fn zero_loads_stay_at_rest() {
        let mesh = build_structured_grid(1, 2, 1.0, 2.0).unwrap();
        let (s, f) = params();
        let mut bc = DirichletSet::new();
        bc.fix_region_u(&mesh, "bottom", 1, 0.0).unwrap();
        bc.fix_region_u(&mesh, "left", 0, 0.0).unwrap();
        let sys = LinearBiotSystem::assemble(&mesh, &s, &f, &LoadCase::default(), &bc).unwrap();
        for scheme in [LinearScheme::BackwardDifference, LinearScheme::Newmark(NewmarkParams::default())] {
            let mut st = LinearStepper::new(sys.clone(), scheme, 0.01).unwrap();
            for _ in 0..3 {
                st.advance().unwrap();
            }
            assert!(st.state.u.iter().chain(&st.state.p).all(|&v| v == 0.0));
        }
    }

    #[test]
    fn newmark_helpers_reduce_to_trapezoid() {
        let nm = NewmarkParams::default();
        let (v, a, dt) = (2.0, -1.0, 0.1);
        let a_next = 3.0;
        let du = dt * v + dt * dt * (0.25 * a + 0.25 * a_next);
        assert!((nm.accel(du, v, a, dt) - a_next).abs() < 1e-12);
        assert!((nm.velocity(v, a, a_next, dt) - (v + 0.5 * dt * (a + a_next))).abs() < 1e-15);
        assert!(NewmarkParams { beta: 0.0, gamma: 0.5 }.validate().is_err());
    }

    #[test]
    fn single_dof_trapezoid_conserves_energy() {
        let nm = NewmarkParams::default();
        let (m, k, dt) = (2.0, 50.0, 0.05);
        let (mut u, mut v) = (0.1, 0.0);
        let mut a = -k * u / m;
        let energy = |u: f64, v: f64| 0.5 * m * v * v + 0.5 * k * u * u;
        let e0 = energy(u, v);
        for _ in 0..1000 {
            let ap = nm.predicted_accel(v, a, dt);
            let du = (-k * u - m * ap) / (m / (nm.beta * dt * dt) + k);
            let an = nm.accel(du, v, a, dt);
            v = nm.velocity(v, a, an, dt);
            u += du;
            a = an;
            assert!((energy(u, v) - e0).abs() < 1e-12 * e0);
        }
    }
}
