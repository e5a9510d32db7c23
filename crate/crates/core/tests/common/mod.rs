#![allow(dead_code)]

use porosim::assembly::{Assembler, DirichletSet, Increments, LoadCase, LoadProfile, TractionLoad};
use porosim::discretization::build_structured_grid;
use porosim::cases::Problem;
use porosim::constitutive::{FluidParams, SolidParams};
use porosim::discretization::Mesh2D;
use porosim::postproc::{CaseConfig, ModelKind};
use porosim::reference::analytic_compression;
use porosim::stepping::{solve_masked, History, Integrator, RunResult, StepRecord};

pub fn solid() -> SolidParams {
    SolidParams {
        lambda: 29e6,
        mu: 7e6,
        rho_s0: 2700.0,
        phi_s0: 0.58,
    }
}

pub fn fluid() -> FluidParams {
    FluidParams {
        rho_f0: 1000.0,
        kappa_f: 22e9,
        p0: 0.0,
        k0: FluidParams::k0_from_conductivity(0.1, 9.81, 1000.0),
        varkappa: 0.8,
    }
}

pub fn top_load(hbar: f64, profile: LoadProfile) -> LoadCase {
    LoadCase {
        tractions: vec![TractionLoad {
            region: "top".into(),
            traction: [0.0, -hbar],
            curvature: 0.0,
        }],
        profile,
        ..Default::default()
    }
}

/// Rollers on left, right and bottom; drained top.
pub fn oedometer_bc(mesh: &Mesh2D) -> DirichletSet {
    let mut bc = DirichletSet::new();
    bc.fix_region_u(mesh, "left", 0, 0.0).unwrap();
    bc.fix_region_u(mesh, "right", 0, 0.0).unwrap();
    bc.fix_region_u(mesh, "bottom", 1, 0.0).unwrap();
    bc.fix_region_p(mesh, "top", 0.0).unwrap();
    bc
}

pub fn with_model(mut c: CaseConfig, kind: ModelKind) -> CaseConfig {
    c.model.kind = kind;
    c
}

pub fn run_config(c: &CaseConfig) -> RunResult {
    Problem::from_config(c).unwrap().run().unwrap().into_result().unwrap()
}

/// Vertical displacement history of probe `i`.
pub fn uy(records: &[StepRecord], i: usize) -> Vec<f64> {
    records.iter().map(|r| r.displacement[i][1]).collect()
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Tiny deterministic generator for test data outside proptest.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    pub fn vec(&mut self, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| scale * self.next()).collect()
    }
}

/// Solid and fluid residuals when the configuration moves by `eps·w`, the
/// pressure by `eps·q`, and the increments are `(eps·w, eps·q)`.
pub fn residual_along(
    asm: &Assembler,
    mesh: &Mesh2D,
    p: &[f64],
    w: &[f64],
    q: &[f64],
    eps: f64,
    dt: f64,
) -> (Vec<f64>, Vec<f64>) {
    let loads = LoadCase::default();
    let moved = mesh.update_coordinates(&w.iter().map(|v| eps * v).collect::<Vec<_>>()).unwrap();
    let pe: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + eps * b).collect();
    let du: Vec<f64> = w.iter().map(|v| eps * v).collect();
    let dp: Vec<f64> = q.iter().map(|v| eps * v).collect();
    let accel: Vec<f64> = du.iter().map(|v| v / (dt * dt)).collect();
    let rs = asm.residual_solid(&moved, &pe, &accel, &loads, loads.at(0)).unwrap();
    let rf = asm.residual_fluid(&moved, &pe, &du, &dp, &accel, loads.at(0), dt).unwrap();
    (rs, rf)
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    dist(a, b) / norm(b)
}

pub fn tangent_check(seed: u64) -> (f64, f64) {
    let mesh0 = build_structured_grid(2, 2, 1.0, 1.0).unwrap();
    let asm = Assembler::new(&mesh0, solid(), fluid()).unwrap();
    let mut rng = Lcg(seed);
    let (nu, np) = (asm.n_u(), asm.n_p());
    // smooth random deformation plus nodal noise
    let g = rng.vec(4, 0.15);
    let noise = rng.vec(nu, 3e-3);
    let base: Vec<f64> = mesh0
        .initial_coords()
        .iter()
        .enumerate()
        .flat_map(|(n, x)| {
            [
                g[0] * x.x + g[1] * x.y + noise[2 * n],
                g[2] * x.x + g[3] * x.y + noise[2 * n + 1],
            ]
        })
        .collect();
    let mesh = mesh0.with_displacement(&base).unwrap();
    let p = rng.vec(np, 1e5);
    let w = rng.vec(nu, 1e-2);
    let q = rng.vec(np, 1e4);
    let dt = 0.1;

    let (z, zp) = rest(&asm);
    let inc = Increments {
        du: &z,
        du_prev: &z,
        dp: &zp,
    };
    let sys = asm.assemble_predictor(&mesh, &p, &inc, &LoadCase::default(), 0, dt).unwrap();
    let (lu, mut lp) = sys.apply(&w, &q);
    // the Darcy flux of the current pressure is convected explicitly
    let flux = asm.flux_variation(&mesh, &p, &w).unwrap();
    lp.iter_mut().zip(flux).for_each(|(a, b)| *a += dt * b);

    let mut best = (f64::INFINITY, f64::INFINITY);
    for eps in [1e-2, 1e-3, 1e-4] {
        let (sp, fp) = residual_along(&asm, &mesh, &p, &w, &q, eps, dt);
        let (sm, fm) = residual_along(&asm, &mesh, &p, &w, &q, -eps, dt);
        let ds: Vec<f64> = sp.iter().zip(&sm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let df: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        best.0 = best.0.min(rel_err(&ds, &lu));
        best.1 = best.1.min(rel_err(&df, &lp));
    }
    best
}

/// Strain at the centre of every element.
pub fn element_strains(mesh: &Mesh2D, u: &[f64]) -> Vec<[f64; 3]> {
    (0..mesh.n_elements())
        .map(|e| {
            let k = mesh.kinematics(e, [0.0, 0.0], 1.0).unwrap();
            let el = mesh.element(e);
            let mut g = [[0.0; 2]; 2];
            for (a, &n) in el.q2.iter().enumerate() {
                for (i, row) in g.iter_mut().enumerate() {
                    for (j, v) in row.iter_mut().enumerate() {
                        *v += u[2 * n + i] * k.grad2[a][j];
                    }
                }
            }
            [g[0][0], g[1][1], 0.5 * (g[0][1] + g[1][0])]
        })
        .collect()
}


pub fn rest(asm: &Assembler) -> (Vec<f64>, Vec<f64>) {
    (vec![0.0; asm.n_u()], vec![0.0; asm.n_p()])
}

/// Static response of a 3×3 block on rollers (left, bottom) to a uniform
/// top pressure `hbar`: strain at every element centre.
pub fn patch_strains(hbar: f64) -> Vec<[f64; 3]> {
    let mesh = build_structured_grid(3, 3, 3.0, 3.0).unwrap();
    let asm = Assembler::new(&mesh, solid(), fluid()).unwrap();
    let mut bc = DirichletSet::new();
    bc.fix_region_u(&mesh, "left", 0, 0.0).unwrap();
    bc.fix_region_u(&mesh, "bottom", 1, 0.0).unwrap();
    let loads = top_load(hbar, LoadProfile::Constant);
    let (z, zp) = rest(&asm);
    let inc = Increments {
        du: &z,
        du_prev: &z,
        dp: &zp,
    };
    let sys = asm.assemble_predictor(&mesh, &zp, &inc, &loads, 0, 1.0).unwrap();
    // the static tangent alone: the load is the full traction increment
    let mut f = vec![0.0; asm.n_u()];
    let level = loads.at(1);
    let rs = asm.residual_solid(&mesh, &zp, &z, &loads, level).unwrap();
    f.iter_mut().zip(rs).for_each(|(a, r)| *a -= r);
    assert!(rel_err(&f, &sys.f) <= 1e-12, "at rest the predictor load is the traction");
    let u = solve_masked(&sys.auu, &f, &bc.u_mask(asm.n_u()), 1).unwrap();

    element_strains(&mesh, &u)
}

/// Largest deviation from the first element's strain, relative to its
/// largest component.
pub fn strain_spread(strains: &[[f64; 3]]) -> f64 {
    let reference = strains[0];
    let scale = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    strains
        .iter()
        .flat_map(|s| s.iter().zip(&reference).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
        / scale
}

/// Plane-strain uniaxial-stress strain `ε_yy` under a top pressure.
pub fn uniaxial_strain(hbar: f64) -> f64 {
    let (l, m) = (solid().lambda, solid().mu);
    -hbar * (l + 2.0 * m) / (4.0 * m * (l + m))
}

pub fn column_integrator(hbar: f64, profile: LoadProfile, dt: f64) -> (Integrator, Mesh2D) {
    let mesh = build_structured_grid(1, 10, 1.0, 10.0).unwrap();
    let asm = Assembler::new(&mesh, solid(), fluid()).unwrap();
    let bc = oedometer_bc(&mesh);
    (Integrator::new(asm, top_load(hbar, profile), bc, dt).unwrap(), mesh)
}

/// The exact drained solution `u_y = e_y·y` under the constant load,
/// dressed as a history at some step `k > 0`.
pub fn drained_history(mesh0: &Mesh2D, hbar: f64) -> History {
    let s = solid();
    let e = analytic_compression(s.lambda, s.mu, hbar).unwrap();
    let u: Vec<f64> = mesh0.initial_coords().iter().flat_map(|x| [0.0, e * x.y]).collect();
    let nu = u.len();
    History {
        k: 7,
        time: 0.07,
        mesh: mesh0.with_displacement(&u).unwrap(),
        p: vec![0.0; mesh0.n_q1_nodes()],
        du: vec![0.0; nu],
        du_prev: vec![0.0; nu],
        dp: vec![0.0; mesh0.n_q1_nodes()],
        mid_mesh: None,
    }
}

