use nalgebra::Matrix3;

use super::loads::{LoadCase, LoadLevel};
use super::sparse::CsrMatrix;
use super::system::{check_finite, BlockPatterns, BlockSystem};
use crate::constitutive::{
    biot_coefficients, CoefficientSet, FluidParams,
    MaterialPoint, SolidParams,
};
use crate::discretization::{Element, LineRule, Mesh2D, PointKinematics, QuadratureRule};
use crate::error::{Error, Result};

/// Backward differences carried between steps: `du = δu^k`,
/// `du_prev = δu^{k−1}`, `dp = δp^k`.
#[derive(Debug, Clone, Copy)]
pub struct Increments<'a> {
    pub du: &'a [f64],
    pub du_prev: &'a [f64],
    pub dp: &'a [f64],
}

/// Configuration and convection fields at which the incremental operators
/// are evaluated. The mesh's current coordinates define the configuration;
/// `p` is the total pressure there.
#[derive(Debug, Clone, Copy)]
pub struct Linearization<'a> {
    pub mesh: &'a Mesh2D,
    pub p: &'a [f64],
    pub u_star: &'a [f64],
    pub p_star: &'a [f64],
}

/// Systems needed for the consistent start at `t = 0+`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSystem {
    /// Consistent mass, `∫ρ̄ φ_a φ_b`.
    pub mass: CsrMatrix,
    /// External minus internal forces at `0+`.
    pub accel_rhs: Vec<f64>,
    /// `∫ψ M ψ`.
    pub compressibility: CsrMatrix,
    /// `∫ρ_f ∇ψ·K φ_b`, applied to the initial acceleration.
    pub coupling: CsrMatrix,
    /// Pressure-rate right-hand side without the acceleration term.
    pub pressure_rhs_base: Vec<f64>,
}

impl InitialSystem {
    pub fn pressure_rhs(&self, accel: &[f64]) -> Vec<f64> {
        let mut r = self.pressure_rhs_base.clone();
        self.coupling.mul_vec_add(-1.0, accel, &mut r);
        r
    }
}

/// Quantities at one quadrature point.
struct Qp {
    kin: PointKinematics,
    point: MaterialPoint,
    coeffs: CoefficientSet,
    grad_p: [f64; 2],
}

fn vec_value(k: &PointKinematics, el: &Element, u: &[f64]) -> [f64; 2] {
    let mut v = [0.0; 2];
    for (a, &n) in el.q2.iter().enumerate() {
        v[0] += k.n2[a] * u[2 * n];
        v[1] += k.n2[a] * u[2 * n + 1];
    }
    v
}

/// `(∇u)_ij = ∂u_i/∂x_j`, embedded in 3×3 with a zero out-of-plane row.
fn vec_grad(k: &PointKinematics, el: &Element, u: &[f64]) -> Matrix3<f64> {
    let mut g = Matrix3::zeros();
    for (a, &n) in el.q2.iter().enumerate() {
        for i in 0..2 {
            for j in 0..2 {
                g[(i, j)] += u[2 * n + i] * k.grad2[a][j];
            }
        }
    }
    g
}

fn vec_grad_material(k: &PointKinematics, el: &Element, u: &[f64]) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for (a, &n) in el.q2.iter().enumerate() {
        for (i, row) in g.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += u[2 * n + i] * k.grad2_material[a][j];
            }
        }
    }
    g
}

fn scal_value(k: &PointKinematics, el: &Element, p: &[f64]) -> f64 {
    el.q1.iter().zip(k.n1).map(|(&n, s)| s * p[n]).sum()
}

fn scal_grad(k: &PointKinematics, el: &Element, p: &[f64]) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (a, &n) in el.q1.iter().enumerate() {
        g[0] += k.grad1[a][0] * p[n];
        g[1] += k.grad1[a][1] * p[n];
    }
    g
}

/// `a · T b` for a 2D slice of a 3×3 tensor.
fn bilinear(a: [f64; 2], t: &Matrix3<f64>, b: [f64; 2]) -> f64 {
    let mut s = 0.0;
    for m in 0..2 {
        for n in 0..2 {
            s += a[m] * t[(m, n)] * b[n];
        }
    }
    s
}

fn double_dot(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    a.component_mul(b).sum()
}

fn check_len(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: v.len(),
        });
    }
    Ok(())
}

/// Element integration for the predictor, corrector, residual and
/// initialization forms on a fixed mesh topology.
#[derive(Debug, Clone)]
pub struct Assembler {
    patterns: BlockPatterns,
    solid: SolidParams,
    fluid: FluidParams,
    rule: QuadratureRule,
    edge_rule: LineRule,
}

impl Assembler {
    pub fn new(mesh: &Mesh2D, solid: SolidParams, fluid: FluidParams) -> Result<Self> {
        solid.validate()?;
        fluid.validate()?;
        Ok(Self {
            patterns: BlockPatterns::new(mesh),
            solid,
            fluid,
            rule: QuadratureRule::volume_default(),
            edge_rule: LineRule::gauss(3)?,
        })
    }

    pub fn patterns(&self) -> &BlockPatterns {
        &self.patterns
    }

    pub fn solid(&self) -> &SolidParams {
        &self.solid
    }

    pub fn fluid(&self) -> &FluidParams {
        &self.fluid
    }

    pub fn n_u(&self) -> usize {
        self.patterns.n_u()
    }

    pub fn n_p(&self) -> usize {
        self.patterns.n_p()
    }

    fn check_lin(&self, lin: &Linearization<'_>) -> Result<()> {
        if lin.mesh.n_q2_nodes() * 2 != self.n_u() || lin.mesh.n_q1_nodes() != self.n_p() {
            return Err(Error::InvalidInput("mesh topology differs from the assembler's".into()));
        }
        check_len(lin.p, self.n_p())?;
        check_len(lin.u_star, self.n_u())?;
        check_len(lin.p_star, self.n_p())?;
        check_finite("pressure", lin.p)?;
        check_finite("convection displacement", lin.u_star)
    }

    fn check_inc(&self, inc: &Increments<'_>) -> Result<()> {
        check_len(inc.du, self.n_u())?;
        check_len(inc.du_prev, self.n_u())?;
        check_len(inc.dp, self.n_p())
    }

    /// Visits every quadrature point of the configuration.
    fn for_each_qp(
        &self,
        lin: &Linearization<'_>,
        mut visit: impl FnMut(&Element, &Qp) -> Result<()>,
    ) -> Result<()> {
        let mesh = lin.mesh;
        let u_total = mesh.displacement();
        for (e, el) in mesh.elements().iter().enumerate() {
            for (xi, &w) in self.rule.points.iter().zip(&self.rule.weights) {
                let kin = mesh.kinematics(e, *xi, w)?;
                let p = scal_value(&kin, el, lin.p);
                let point = MaterialPoint::from_displacement_gradient(
                    vec_grad_material(&kin, el, &u_total),
                    p,
                    &self.solid,
                    &self.fluid,
                )
                .map_err(|err| match err {
                    Error::NonPhysical(m) => Error::NonPhysical(format!("element {e}: {m}")),
                    other => other,
                })?;
                let gstar = vec_grad(&kin, el, lin.u_star);
                let pstar = scal_value(&kin, el, lin.p_star);
                let coeffs = CoefficientSet::evaluate(&point, &self.solid, &self.fluid, &gstar, pstar)?;
                let grad_p = scal_grad(&kin, el, lin.p);
                visit(
                    el,
                    &Qp {
                        kin,
                        point,
                        coeffs,
                        grad_p,
                    },
                )?;
            }
        }
        Ok(())
    }

    /// Left-hand side blocks shared by predictor and corrector.
    fn add_lhs(sys: &mut BlockSystem, el: &Element, qp: &Qp) {
        let k = &qp.kin;
        let c = &qp.coeffs;
        let dv = k.dv;
        let mass = (qp.point.rho_bar + c.r_tilde) * dv;
        let coupling = c.b + c.b_tilde;
        let k_dyn = c.k + c.k_hat + c.dk;
        let compress = (c.m + c.m_tilde + c.dm) * dv;

        for a in 0..9 {
            let ga = k.grad2[a];
            for i in 0..2 {
                let r = 2 * el.q2[a] + i;
                for b in 0..9 {
                    let gb = k.grad2[b];
                    sys.muu.add(r, 2 * el.q2[b] + i, mass * k.n2[a] * k.n2[b]);
                    for kk in 0..2 {
                        let mut s = 0.0;
                        for j in 0..2 {
                            for l in 0..2 {
                                s += c.a_tilde[(i, j, kk, l)] * ga[j] * gb[l];
                            }
                        }
                        sys.auu.add(r, 2 * el.q2[b] + kk, s * dv);
                    }
                }
                for (cc, &q) in el.q1.iter().enumerate() {
                    sys.bup.add(r, q, k.n1[cc] * ga[i] * dv);
                }
            }
        }
        for (cc, &row) in el.q1.iter().enumerate() {
            let gc = k.grad1[cc];
            let psi = k.n1[cc];
            for b in 0..9 {
                let gb = k.grad2[b];
                for kk in 0..2 {
                    let col = 2 * el.q2[b] + kk;
                    let cv = coupling[(kk, 0)] * gb[0] + coupling[(kk, 1)] * gb[1];
                    sys.cpu.add(row, col, psi * cv * dv);
                    let nv = gc[0] * k_dyn[(0, kk)] + gc[1] * k_dyn[(1, kk)];
                    sys.npu.add(row, col, qp.point.rho_f * nv * k.n2[b] * dv);
                }
            }
            for (d, &colp) in el.q1.iter().enumerate() {
                sys.kpp.add(row, colp, bilinear(gc, &c.k, k.grad1[d]) * dv);
                sys.dpp.add(row, colp, compress * psi * k.n1[d]);
            }
        }
    }

    /// Adds `∫_Γ (factor·h + (n·u*) ℋ curv_factor·h)·v` over all loaded
    /// regions of the mesh's current configuration.
    fn add_traction(
        &self,
        mesh: &Mesh2D,
        loads: &LoadCase,
        factor: f64,
        curv_factor: f64,
        u_star: &[f64],
        f: &mut [f64],
    ) -> Result<()> {
        for t in &loads.tractions {
            for edge in mesh.region(&t.region)? {
                for (&s, &w) in self.edge_rule.points.iter().zip(&self.edge_rule.weights) {
                    let g = mesh.edge_geometry(edge, s);
                    let mut ustar = [0.0; 2];
                    for (m, &n) in edge.q2.iter().enumerate() {
                        ustar[0] += g.shape[m] * u_star[2 * n];
                        ustar[1] += g.shape[m] * u_star[2 * n + 1];
                    }
                    let un = ustar[0] * g.normal.x + ustar[1] * g.normal.y;
                    let scale = factor + un * t.curvature * curv_factor;
                    for (m, &n) in edge.q2.iter().enumerate() {
                        for i in 0..2 {
                            f[2 * n + i] += w * g.jacobian * g.shape[m] * scale * t.traction[i];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Predictor system on `Ω_k` with convection `u* = ū`, `p* = p̄`.
    pub fn assemble_predictor(
        &self,
        mesh_k: &Mesh2D,
        p_k: &[f64],
        inc: &Increments<'_>,
        loads: &LoadCase,
        k: usize,
        dt: f64,
    ) -> Result<BlockSystem> {
        check_dt(dt)?;
        self.check_inc(inc)?;
        let lin = Linearization {
            mesh: mesh_k,
            p: p_k,
            u_star: inc.du,
            p_star: inc.dp,
        };
        self.check_lin(&lin)?;
        let next = loads.at(k + 1);
        let now = loads.at(k);
        let mut sys = BlockSystem::zeros(&self.patterns, dt);
        let dt2 = dt * dt;
        self.for_each_qp(&lin, |el, qp| {
            Self::add_lhs(&mut sys, el, qp);
            let kin = &qp.kin;
            let c = &qp.coeffs;
            let dv = kin.dv;
            let ubar = vec_value(kin, el, inc.du);
            let gubar = vec_grad(kin, el, inc.du);
            let rho = qp.point.rho_bar + c.r_tilde;
            let acc = [
                ubar[0] / dt2 + next.body_force[0],
                ubar[1] / dt2 + next.body_force[1],
            ];
            let stress = qp.point.total_stress() - c.db * qp.point.p;
            for a in 0..9 {
                let ga = kin.grad2[a];
                for i in 0..2 {
                    let internal = stress[(i, 0)] * ga[0] + stress[(i, 1)] * ga[1];
                    sys.f[2 * el.q2[a] + i] += (rho * acc[i] * kin.n2[a] - internal) * dv;
                }
            }
            let k_conv = c.k + c.k_tilde + c.dk;
            let k_dyn = c.k + c.k_hat + c.dk;
            let r = [
                now.fluid_force[0] + ubar[0] / dt2,
                now.fluid_force[1] + ubar[1] / dt2,
            ];
            let db_ubar = double_dot(&c.db, &gubar);
            for (cc, &row) in el.q1.iter().enumerate() {
                let gc = kin.grad1[cc];
                sys.g[row] += (-kin.n1[cc] * db_ubar - dt * bilinear(gc, &k_conv, qp.grad_p)
                    + dt * qp.point.rho_f * bilinear(gc, &k_dyn, r))
                    * dv;
            }
            Ok(())
        })?;
        self.add_traction(mesh_k, loads, next.factor, now.factor, inc.du, &mut sys.f)?;
        check_finite("predictor rhs", &sys.f)?;
        check_finite("predictor rhs", &sys.g)?;
        Ok(sys)
    }

    /// Corrector system on the mid configuration `mesh_mid` (pressure
    /// `p_mid`), with convection `u* = u_pred`, `p* = p_pred`. The residual
    /// terms are evaluated on `Ω_k`.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble_corrector(
        &self,
        mesh_k: &Mesh2D,
        p_k: &[f64],
        mesh_mid: &Mesh2D,
        p_mid: &[f64],
        u_pred: &[f64],
        p_pred: &[f64],
        inc: &Increments<'_>,
        loads: &LoadCase,
        k: usize,
        dt: f64,
    ) -> Result<BlockSystem> {
        check_dt(dt)?;
        self.check_inc(inc)?;
        let lin = Linearization {
            mesh: mesh_mid,
            p: p_mid,
            u_star: u_pred,
            p_star: p_pred,
        };
        self.check_lin(&lin)?;
        let mid = loads.mid(k);
        let delta = loads.increment(k);
        let dt2 = dt * dt;
        let mut sys = BlockSystem::zeros(&self.patterns, dt);
        self.for_each_qp(&lin, |el, qp| {
            Self::add_lhs(&mut sys, el, qp);
            let kin = &qp.kin;
            let c = &qp.coeffs;
            let dv = kin.dv;
            let ubar = vec_value(kin, el, inc.du);
            let uprev = vec_value(kin, el, inc.du_prev);
            let gubar = vec_grad(kin, el, inc.du);
            let pbar = scal_value(kin, el, inc.dp);
            let rho = qp.point.rho_bar;
            for a in 0..9 {
                let ga = kin.grad2[a];
                for i in 0..2 {
                    let body = c.r_tilde * (mid.body_force[i] + ubar[i] / dt2)
                        + rho * (delta.body_force[i] + (2.0 * ubar[i] - uprev[i]) / dt2);
                    let db = qp.point.p * (c.db[(i, 0)] * ga[0] + c.db[(i, 1)] * ga[1]);
                    sys.f[2 * el.q2[a] + i] += (body * kin.n2[a] + db) * dv;
                }
            }
            let div_terms = double_dot(&c.b, &gubar) - double_dot(&c.db, &gubar) + c.m * pbar;
            let k_conv = c.k_tilde + c.dk;
            let k_dyn = c.k_hat + c.dk;
            let ra = [
                mid.fluid_force[0] + ubar[0] / dt2,
                mid.fluid_force[1] + ubar[1] / dt2,
            ];
            let rb = [
                delta.fluid_force[0] + (2.0 * ubar[0] - uprev[0]) / dt2,
                delta.fluid_force[1] + (2.0 * ubar[1] - uprev[1]) / dt2,
            ];
            for (cc, &row) in el.q1.iter().enumerate() {
                let gc = kin.grad1[cc];
                sys.g[row] += (kin.n1[cc] * div_terms - dt * bilinear(gc, &k_conv, qp.grad_p)
                    + dt * qp.point.rho_f * (bilinear(gc, &k_dyn, ra) + bilinear(gc, &c.k, rb)))
                    * dv;
            }
            Ok(())
        })?;
        self.add_traction(mesh_mid, loads, delta.factor, mid.factor, u_pred, &mut sys.f)?;

        // ü(t_k) ≈ (u^pred − ū)/δt²
        let accel: Vec<f64> = u_pred
            .iter()
            .zip(inc.du)
            .map(|(a, b)| (a - b) / dt2)
            .collect();
        let rs = self.residual_solid(mesh_k, p_k, &accel, loads, loads.at(k))?;
        let rf = self.residual_fluid(mesh_k, p_k, inc.du, inc.dp, &accel, loads.at(k), dt)?;
        sys.f.iter_mut().zip(rs).for_each(|(f, r)| *f -= r);
        sys.g.iter_mut().zip(rf).for_each(|(g, r)| *g -= r);
        check_finite("corrector rhs", &sys.f)?;
        check_finite("corrector rhs", &sys.g)?;
        Ok(sys)
    }

    /// `∫σ:∇v − ∫ρ̄(g − ü)·v − ∫_Γ h·v` on the mesh's configuration.
    pub fn residual_solid(
        &self,
        mesh: &Mesh2D,
        p: &[f64],
        accel: &[f64],
        loads: &LoadCase,
        level: LoadLevel,
    ) -> Result<Vec<f64>> {
        check_len(accel, self.n_u())?;
        let zero_u = vec![0.0; self.n_u()];
        let zero_p = vec![0.0; self.n_p()];
        let lin = Linearization {
            mesh,
            p,
            u_star: &zero_u,
            p_star: &zero_p,
        };
        self.check_lin(&lin)?;
        let mut r = vec![0.0; self.n_u()];
        self.for_each_qp(&lin, |el, qp| {
            let kin = &qp.kin;
            let acc = vec_value(kin, el, accel);
            let stress = qp.point.total_stress();
            for a in 0..9 {
                let ga = kin.grad2[a];
                for i in 0..2 {
                    let internal = stress[(i, 0)] * ga[0] + stress[(i, 1)] * ga[1];
                    let inertia = qp.point.rho_bar * (level.body_force[i] - acc[i]) * kin.n2[a];
                    r[2 * el.q2[a] + i] += (internal - inertia) * kin.dv;
                }
            }
            Ok(())
        })?;
        let mut h = vec![0.0; self.n_u()];
        self.add_traction(mesh, loads, level.factor, 0.0, &zero_u, &mut h)?;
        r.iter_mut().zip(h).for_each(|(a, b)| *a -= b);
        Ok(r)
    }

    /// `∫ψB:∇ū + δt K(∇p − ρ_f(f − ü))·∇ψ + ψ M p̄` on the mesh's
    /// configuration.
    #[allow(clippy::too_many_arguments)]
    pub fn residual_fluid(
        &self,
        mesh: &Mesh2D,
        p: &[f64],
        du: &[f64],
        dp: &[f64],
        accel: &[f64],
        level: LoadLevel,
        dt: f64,
    ) -> Result<Vec<f64>> {
        check_len(du, self.n_u())?;
        check_len(dp, self.n_p())?;
        check_len(accel, self.n_u())?;
        let mut r = vec![0.0; self.n_p()];
        let u_total = mesh.displacement();
        for (e, el) in mesh.elements().iter().enumerate() {
            for (xi, &w) in self.rule.points.iter().zip(&self.rule.weights) {
                let kin = mesh.kinematics(e, *xi, w)?;
                let pv = scal_value(&kin, el, p);
                let point = MaterialPoint::from_displacement_gradient(
                    vec_grad_material(&kin, el, &u_total),
                    pv,
                    &self.solid,
                    &self.fluid,
                )?;
                let coeffs = biot_coefficients(point.j, point.phi, &self.fluid)?;
                let gp = scal_grad(&kin, el, p);
                let acc = vec_value(&kin, el, accel);
                let gdu = vec_grad(&kin, el, du);
                let pbar = scal_value(&kin, el, dp);
                let flux = [
                    gp[0] - point.rho_f * (level.fluid_force[0] - acc[0]),
                    gp[1] - point.rho_f * (level.fluid_force[1] - acc[1]),
                ];
                let div = double_dot(&coeffs.b, &gdu);
                for (cc, &row) in el.q1.iter().enumerate() {
                    r[row] += (kin.n1[cc] * (div + coeffs.m * pbar)
                        + dt * bilinear(kin.grad1[cc], &coeffs.k, flux))
                        * kin.dv;
                }
            }
        }
        Ok(r)
    }

    /// `∫(K̃(w) + δK(w))∇p·∇ψ`: first-order change of the Darcy flux form
    /// when the configuration is convected by `w`.
    pub fn flux_variation(&self, mesh: &Mesh2D, p: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let zero_p = vec![0.0; self.n_p()];
        let lin = Linearization {
            mesh,
            p,
            u_star: w,
            p_star: &zero_p,
        };
        self.check_lin(&lin)?;
        let mut r = vec![0.0; self.n_p()];
        self.for_each_qp(&lin, |el, qp| {
            let c = &qp.coeffs;
            let kk = c.k_tilde + c.dk;
            for (cc, &row) in el.q1.iter().enumerate() {
                r[row] += bilinear(qp.kin.grad1[cc], &kk, qp.grad_p) * qp.kin.dv;
            }
            Ok(())
        })?;
        Ok(r)
    }

    /// Start-up systems at `t = 0+` on the mesh's configuration (which
    /// already carries the initial displacement).
    pub fn assemble_initial(
        &self,
        mesh0: &Mesh2D,
        v0: &[f64],
        p0: &[f64],
        loads: &LoadCase,
    ) -> Result<InitialSystem> {
        check_len(v0, self.n_u())?;
        let zero_u = vec![0.0; self.n_u()];
        let zero_p = vec![0.0; self.n_p()];
        let lin = Linearization {
            mesh: mesh0,
            p: p0,
            u_star: &zero_u,
            p_star: &zero_p,
        };
        self.check_lin(&lin)?;
        let level = loads.initial();
        let mut mass = CsrMatrix::zeros(self.patterns.uu.clone());
        let mut compressibility = CsrMatrix::zeros(self.patterns.pp.clone());
        let mut coupling = CsrMatrix::zeros(self.patterns.pu.clone());
        let mut accel_rhs = vec![0.0; self.n_u()];
        let mut pressure_rhs_base = vec![0.0; self.n_p()];
        self.for_each_qp(&lin, |el, qp| {
            let kin = &qp.kin;
            let c = &qp.coeffs;
            let dv = kin.dv;
            let stress = qp.point.total_stress();
            for a in 0..9 {
                let ga = kin.grad2[a];
                for i in 0..2 {
                    let r = 2 * el.q2[a] + i;
                    for b in 0..9 {
                        mass.add(r, 2 * el.q2[b] + i, qp.point.rho_bar * kin.n2[a] * kin.n2[b] * dv);
                    }
                    let internal = stress[(i, 0)] * ga[0] + stress[(i, 1)] * ga[1];
                    accel_rhs[r] +=
                        (qp.point.rho_bar * level.body_force[i] * kin.n2[a] - internal) * dv;
                }
            }
            let gv0 = vec_grad(kin, el, v0);
            let div_v0 = double_dot(&c.b, &gv0);
            let flux = [
                qp.grad_p[0] - qp.point.rho_f * level.fluid_force[0],
                qp.grad_p[1] - qp.point.rho_f * level.fluid_force[1],
            ];
            for (cc, &row) in el.q1.iter().enumerate() {
                let gc = kin.grad1[cc];
                let psi = kin.n1[cc];
                for (d, &col) in el.q1.iter().enumerate() {
                    compressibility.add(row, col, c.m * psi * kin.n1[d] * dv);
                }
                for b in 0..9 {
                    for kk in 0..2 {
                        let nv = gc[0] * c.k[(0, kk)] + gc[1] * c.k[(1, kk)];
                        coupling.add(row, 2 * el.q2[b] + kk, qp.point.rho_f * nv * kin.n2[b] * dv);
                    }
                }
                pressure_rhs_base[row] -= (bilinear(gc, &c.k, flux) + psi * div_v0) * dv;
            }
            Ok(())
        })?;
        self.add_traction(mesh0, loads, level.factor, 0.0, &zero_u, &mut accel_rhs)?;
        Ok(InitialSystem {
            mass,
            accel_rhs,
            compressibility,
            coupling,
            pressure_rhs_base,
        })
    }

    /// Dissipation `∫K∇p·∇p` and the element-averaged volume ratio and
    /// stored energy, on the mesh's configuration.
    pub fn element_fields(&self, mesh: &Mesh2D, p: &[f64]) -> Result<ElementFields> {
        check_len(p, self.n_p())?;
        let u_total = mesh.displacement();
        let n = mesh.n_elements();
        let mut out = ElementFields {
            volume_ratio: vec![0.0; n],
            energy: vec![0.0; n],
            dissipation: vec![0.0; n],
        };
        for (e, el) in mesh.elements().iter().enumerate() {
            let mut area = 0.0;
            for (xi, &w) in self.rule.points.iter().zip(&self.rule.weights) {
                let kin = mesh.kinematics(e, *xi, w)?;
                let point = MaterialPoint::from_displacement_gradient(
                    vec_grad_material(&kin, el, &u_total),
                    scal_value(&kin, el, p),
                    &self.solid,
                    &self.fluid,
                )?;
                let k = biot_coefficients(point.j, point.phi, &self.fluid)?.k;
                let gp = scal_grad(&kin, el, p);
                let w_density =
                    crate::constitutive::strain_energy_density(&point.f, &self.solid)?;
                // averages over the reference element area
                let dv0 = w * mesh.map_element_initial(e, *xi)?.det;
                area += dv0;
                out.volume_ratio[e] += point.j * dv0;
                out.energy[e] += w_density * dv0;
                out.dissipation[e] += bilinear(gp, &k, gp) * kin.dv;
            }
            out.volume_ratio[e] /= area;
            out.energy[e] /= area;
        }
        Ok(out)
    }

    /// Seepage velocity `−K(∇p − ρ_f(f − ü))` at the centre of each
    /// element.
    pub fn element_seepage(
        &self,
        mesh: &Mesh2D,
        p: &[f64],
        accel: &[f64],
        fluid_force: [f64; 2],
    ) -> Result<Vec<[f64; 2]>> {
        check_len(p, self.n_p())?;
        check_len(accel, self.n_u())?;
        let u_total = mesh.displacement();
        mesh.elements()
            .iter()
            .enumerate()
            .map(|(e, el)| {
                let kin = mesh.kinematics(e, [0.0, 0.0], 1.0)?;
                let point = MaterialPoint::from_displacement_gradient(
                    vec_grad_material(&kin, el, &u_total),
                    scal_value(&kin, el, p),
                    &self.solid,
                    &self.fluid,
                )?;
                let k = biot_coefficients(point.j, point.phi, &self.fluid)?.k;
                Ok(crate::postproc::seepage_velocity(
                    &k,
                    point.rho_f,
                    scal_grad(&kin, el, p),
                    vec_value(&kin, el, accel),
                    fluid_force,
                ))
            })
            .collect()
    }

    /// Jacobian-free evaluation of `∫(σ^eff − p I):∇v` at a configuration,
    /// used as the static solid residual.
    pub fn static_solid_residual(&self, mesh: &Mesh2D, p: &[f64]) -> Result<Vec<f64>> {
        let zero = vec![0.0; self.n_u()];
        let loads = LoadCase::default();
        self.residual_solid(mesh, p, &zero, &loads, loads.at(0))
    }
}

/// Per-element averages used by post-processing.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementFields {
    pub volume_ratio: Vec<f64>,
    pub energy: Vec<f64>,
    /// Element contribution to `∫K∇p·∇p`.
    pub dissipation: Vec<f64>,
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time step must be positive, got {dt}")))
    }
}
