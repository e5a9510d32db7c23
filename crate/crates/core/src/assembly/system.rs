use std::collections::BTreeSet;
use std::sync::Arc;

use super::loads::DirichletSet;
use super::sparse::{CsrMatrix, SparsityPattern};
use crate::discretization::Mesh2D;
use crate::error::{Error, Result};

/// Sparsity patterns of the four blocks, fixed by mesh topology.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPatterns {
    pub uu: Arc<SparsityPattern>,
    pub up: Arc<SparsityPattern>,
    pub pu: Arc<SparsityPattern>,
    pub pp: Arc<SparsityPattern>,
}

impl BlockPatterns {
    pub fn new(mesh: &Mesh2D) -> Self {
        let nu = 2 * mesh.n_q2_nodes();
        let np = mesh.n_q1_nodes();
        let mut uu = vec![BTreeSet::new(); nu];
        let mut up = vec![BTreeSet::new(); nu];
        let mut pu = vec![BTreeSet::new(); np];
        let mut pp = vec![BTreeSet::new(); np];
        for el in mesh.elements() {
            let udofs: Vec<usize> = el.q2.iter().flat_map(|&n| [2 * n, 2 * n + 1]).collect();
            for &r in &udofs {
                uu[r].extend(udofs.iter().copied());
                up[r].extend(el.q1.iter().copied());
            }
            for &c in &el.q1 {
                pu[c].extend(udofs.iter().copied());
                pp[c].extend(el.q1.iter().copied());
            }
        }
        Self {
            uu: Arc::new(SparsityPattern::from_rows(nu, &uu)),
            up: Arc::new(SparsityPattern::from_rows(np, &up)),
            pu: Arc::new(SparsityPattern::from_rows(nu, &pu)),
            pp: Arc::new(SparsityPattern::from_rows(np, &pp)),
        }
    }

    pub fn n_u(&self) -> usize {
        self.uu.nrows()
    }

    pub fn n_p(&self) -> usize {
        self.pp.nrows()
    }
}

/// Discrete incremental problem
///
/// ```text
/// [M/δt² + A] u − B p           = f
/// [N/δt  + C] u + [δt K + D] p  = g
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    pub dt: f64,
    pub muu: CsrMatrix,
    pub auu: CsrMatrix,
    pub bup: CsrMatrix,
    pub cpu: CsrMatrix,
    pub npu: CsrMatrix,
    pub kpp: CsrMatrix,
    pub dpp: CsrMatrix,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

impl BlockSystem {
    pub fn zeros(patterns: &BlockPatterns, dt: f64) -> Self {
        Self {
            dt,
            muu: CsrMatrix::zeros(patterns.uu.clone()),
            auu: CsrMatrix::zeros(patterns.uu.clone()),
            bup: CsrMatrix::zeros(patterns.up.clone()),
            cpu: CsrMatrix::zeros(patterns.pu.clone()),
            npu: CsrMatrix::zeros(patterns.pu.clone()),
            kpp: CsrMatrix::zeros(patterns.pp.clone()),
            dpp: CsrMatrix::zeros(patterns.pp.clone()),
            f: vec![0.0; patterns.n_u()],
            g: vec![0.0; patterns.n_p()],
        }
    }

    pub fn n_u(&self) -> usize {
        self.f.len()
    }

    pub fn n_p(&self) -> usize {
        self.g.len()
    }

    /// Left-hand side applied to `(u, p)`.
    pub fn apply(&self, u: &[f64], p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let dt = self.dt;
        let mut ru = self.auu.mul_vec(u);
        self.muu.mul_vec_add(1.0 / (dt * dt), u, &mut ru);
        self.bup.mul_vec_add(-1.0, p, &mut ru);
        let mut rp = self.cpu.mul_vec(u);
        self.npu.mul_vec_add(1.0 / dt, u, &mut rp);
        self.kpp.mul_vec_add(dt, p, &mut rp);
        self.dpp.mul_vec_add(1.0, p, &mut rp);
        (ru, rp)
    }

    /// `‖LHS·(u, p) − (f, g)‖` per block, each relative to its right-hand
    /// side (or absolute when the right-hand side vanishes).
    pub fn relative_residual(&self, u: &[f64], p: &[f64]) -> (f64, f64) {
        let (ru, rp) = self.apply(u, p);
        let rel = |r: &[f64], b: &[f64]| {
            let num = r.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            let den = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if den > 0.0 {
                num / den
            } else {
                num
            }
        };
        (rel(&ru, &self.f), rel(&rp, &self.g))
    }

    /// `(row, col, value)` entries of the combined monolithic matrix, with
    /// pressure unknowns numbered after displacements. Duplicate positions
    /// are summed by the consumer.
    pub fn monolithic_triplets(&self) -> Vec<(usize, usize, f64)> {
        let (dt, nu) = (self.dt, self.n_u());
        let mut t = Vec::new();
        let c2 = 1.0 / (dt * dt);
        for ((r, c, m), (_, _, a)) in self.muu.triplets().zip(self.auu.triplets()) {
            t.push((r, c, c2 * m + a));
        }
        t.extend(self.bup.triplets().map(|(r, c, b)| (r, nu + c, -b)));
        for ((r, c, n), (_, _, cc)) in self.npu.triplets().zip(self.cpu.triplets()) {
            t.push((nu + r, c, n / dt + cc));
        }
        for ((r, c, k), (_, _, d)) in self.kpp.triplets().zip(self.dpp.triplets()) {
            t.push((nu + r, nu + c, dt * k + d));
        }
        t
    }
}

/// Imposes prescribed increments. Constrained rows become identity rows,
/// known columns move to the right-hand side; the pattern is preserved.
pub fn apply_dirichlet(mut sys: BlockSystem, bc: &DirichletSet) -> Result<BlockSystem> {
    let (nu, np) = (sys.n_u(), sys.n_p());
    bc.check_bounds(nu, np)?;
    let dt = sys.dt;

    // move known values to the right-hand side
    for (&dof, &val) in bc.u_constraints() {
        if val != 0.0 {
            for (r, v) in sys.muu.column(dof).iter().zip(sys.auu.column(dof)).enumerate() {
                sys.f[r] -= (v.0 / (dt * dt) + v.1) * val;
            }
            for (r, v) in sys.npu.column(dof).iter().zip(sys.cpu.column(dof)).enumerate() {
                sys.g[r] -= (v.0 / dt + v.1) * val;
            }
        }
    }
    for (&dof, &val) in bc.p_constraints() {
        if val != 0.0 {
            for (r, b) in sys.bup.column(dof).iter().enumerate() {
                sys.f[r] += b * val;
            }
            for (r, v) in sys.kpp.column(dof).iter().zip(sys.dpp.column(dof)).enumerate() {
                sys.g[r] -= (dt * v.0 + v.1) * val;
            }
        }
    }

    let um = bc.u_mask(nu);
    let pm = bc.p_mask(np);
    for m in [&mut sys.muu, &mut sys.auu] {
        m.zero_rows(&um);
        m.zero_cols(&um);
    }
    sys.bup.zero_rows(&um);
    sys.bup.zero_cols(&pm);
    for m in [&mut sys.cpu, &mut sys.npu] {
        m.zero_rows(&pm);
        m.zero_cols(&um);
    }
    for m in [&mut sys.kpp, &mut sys.dpp] {
        m.zero_rows(&pm);
        m.zero_cols(&pm);
    }
    for (&dof, &val) in bc.u_constraints() {
        sys.auu.set(dof, dof, 1.0)?;
        sys.f[dof] = val;
    }
    for (&dof, &val) in bc.p_constraints() {
        sys.dpp.set(dof, dof, 1.0)?;
        sys.g[dof] = val;
    }
    Ok(sys)
}

/// Error unless every entry is finite.
pub(crate) fn check_finite(name: &str, v: &[f64]) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::NonPhysical(format!("{name}[{i}] is {}", v[i]))),
        None => Ok(()),
    }
}
