//! Monolithic sparse direct solves.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::assembly::{BlockSystem, CsrMatrix};
use crate::error::{Error, Result};

/// Relative residual above which a solve is reported as failed.
const ACCEPT_RESIDUAL: f64 = 1e-6;

/// Solves `A x = b` for a square matrix given as (possibly repeated)
/// triplets. Rows and columns are equilibrated before factorization and
/// the answer receives one step of iterative refinement.
pub fn solve_sparse(n: usize, triplets: &[(usize, usize, f64)], rhs: &[f64], step: usize) -> Result<Vec<f64>> {
    if rhs.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: rhs.len(),
        });
    }
    if rhs.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; n]);
    }
    let fail = |message: String| Error::Solver { step, message };

    let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
    entries.sort_unstable_by_key(|&(r, c, _)| (c, r));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for (r, c, v) in entries {
        match merged.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => merged.push((r, c, v)),
        }
    }
    if let Some(&(r, c, v)) = merged.iter().find(|t| !t.2.is_finite()) {
        return Err(fail(format!("non-finite matrix entry {v} at ({r}, {c})")));
    }

    let mut row_scale = vec![0.0f64; n];
    for &(r, _, v) in &merged {
        row_scale[r] = row_scale[r].max(v.abs());
    }
    if let Some(r) = row_scale.iter().position(|&s| s == 0.0) {
        return Err(Error::Singular(format!("row {r} is empty (step {step})")));
    }
    row_scale.iter_mut().for_each(|s| *s = 1.0 / *s);
    let mut col_scale = vec![0.0f64; n];
    for &(r, c, v) in &merged {
        col_scale[c] = col_scale[c].max((v * row_scale[r]).abs());
    }
    if let Some(c) = col_scale.iter().position(|&s| s == 0.0) {
        return Err(Error::Singular(format!("column {c} is empty (step {step})")));
    }
    col_scale.iter_mut().for_each(|s| *s = 1.0 / *s);

    let scaled: Vec<Triplet<usize, usize, f64>> = merged
        .iter()
        .map(|&(r, c, v)| Triplet::new(r, c, v * row_scale[r] * col_scale[c]))
        .collect();
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &scaled)
        .map_err(|e| fail(format!("matrix construction: {e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::Singular(format!("LU factorization failed at step {step}: {e:?}")))?;

    let apply = |x: &[f64]| {
        let mut y = vec![0.0; n];
        for &(r, c, v) in &merged {
            y[r] += v * x[c];
        }
        y
    };
    let solve_scaled = |b: &[f64]| {
        let rb = Mat::<f64>::from_fn(n, 1, |i, _| b[i] * row_scale[i]);
        let y = lu.solve(&rb);
        (0..n).map(|i| y[(i, 0)] * col_scale[i]).collect::<Vec<f64>>()
    };

    let mut x = solve_scaled(rhs);
    let residual = |x: &[f64]| -> Vec<f64> { apply(x).iter().zip(rhs).map(|(a, b)| b - a).collect() };
    let r = residual(&x);
    let dx = solve_scaled(&r);
    x.iter_mut().zip(dx).for_each(|(a, d)| *a += d);

    // residual measured in the equilibrated norm, where every row has unit
    // scale regardless of the physical units of its equation
    let r = residual(&x);
    let num = r.iter().zip(&row_scale).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt();
    let den = rhs.iter().zip(&row_scale).map(|(v, s)| (v * s).powi(2)).sum::<f64>().sqrt();
    let rel = num / den;
    if !rel.is_finite() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular(format!("solution not finite at step {step}")));
    }
    if rel > ACCEPT_RESIDUAL {
        return Err(fail(format!("relative residual {rel:.3e} after refinement")));
    }
    Ok(x)
}

/// Solves a block system (Dirichlet conditions already applied) for the
/// displacement and pressure increments.
pub fn solve_block(sys: &BlockSystem, step: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let nu = sys.n_u();
    let mut rhs = sys.f.clone();
    rhs.extend_from_slice(&sys.g);
    let x = solve_sparse(nu + sys.n_p(), &sys.monolithic_triplets(), &rhs, step)?;
    let p = x[nu..].to_vec();
    let mut u = x;
    u.truncate(nu);
    Ok((u, p))
}

/// Solves `A x = b` where rows and columns flagged in `mask` are replaced
/// by identity rows with zero right-hand side.
pub fn solve_masked(a: &CsrMatrix, b: &[f64], mask: &[bool], step: usize) -> Result<Vec<f64>> {
    let n = a.nrows();
    let mut t: Vec<(usize, usize, f64)> = a
        .triplets()
        .filter(|&(r, c, _)| !mask[r] && !mask[c])
        .collect();
    let mut rhs = b.to_vec();
    for (i, &m) in mask.iter().enumerate() {
        if m {
            t.push((i, i, 1.0));
            rhs[i] = 0.0;
        }
    }
    solve_sparse(n, &t, &rhs, step)
}
