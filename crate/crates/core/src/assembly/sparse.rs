//! Compressed-row matrices with a sparsity pattern fixed by the mesh.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityPattern {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds a pattern from per-row column sets.
    pub fn from_rows(ncols: usize, rows: &[BTreeSet<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for r in rows {
            debug_assert!(r.iter().all(|&c| c < ncols));
            col_idx.extend(r.iter().copied());
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows: rows.len(),
            ncols,
            row_ptr,
            col_idx,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    fn find(&self, r: usize, c: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
        self.col_idx[lo..hi].binary_search(&c).ok().map(|k| lo + k)
    }
}

/// CSR matrix sharing its pattern with other matrices of the same block.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pattern: Arc<SparsityPattern>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: Arc<SparsityPattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn nrows(&self) -> usize {
        self.pattern.nrows
    }

    pub fn ncols(&self) -> usize {
        self.pattern.ncols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Adds `v` at `(r, c)`; the entry must be in the pattern.
    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self
            .pattern
            .find(r, c)
            .unwrap_or_else(|| panic!("entry ({r}, {c}) outside sparsity pattern"));
        self.values[k] += v;
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) -> Result<()> {
        let k = self.pattern.find(r, c).ok_or_else(|| {
            Error::InvalidInput(format!("entry ({r}, {c}) outside sparsity pattern"))
        })?;
        self.values[k] = v;
        Ok(())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.pattern.find(r, c).map_or(0.0, |k| self.values[k])
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows()).flat_map(move |r| {
            let (lo, hi) = (self.pattern.row_ptr[r], self.pattern.row_ptr[r + 1]);
            (lo..hi).map(move |k| (r, self.pattern.col_idx[k], self.values[k]))
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols());
        (0..self.nrows())
            .map(|r| {
                let (lo, hi) = (self.pattern.row_ptr[r], self.pattern.row_ptr[r + 1]);
                (lo..hi)
                    .map(|k| self.values[k] * x[self.pattern.col_idx[k]])
                    .sum()
            })
            .collect()
    }

    /// `y += a · self · x`.
    pub fn mul_vec_add(&self, a: f64, x: &[f64], y: &mut [f64]) {
        let ax = self.mul_vec(x);
        y.iter_mut().zip(ax).for_each(|(yi, v)| *yi += a * v);
    }

    pub fn zero_rows(&mut self, mask: &[bool]) {
        for (r, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
            let (lo, hi) = (self.pattern.row_ptr[r], self.pattern.row_ptr[r + 1]);
            self.values[lo..hi].iter_mut().for_each(|v| *v = 0.0);
        }
    }

    pub fn zero_cols(&mut self, mask: &[bool]) {
        for (v, &c) in self.values.iter_mut().zip(&self.pattern.col_idx) {
            if mask[c] {
                *v = 0.0;
            }
        }
    }

    /// Column `c` as a dense vector.
    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.nrows()).map(|r| self.get(r, c)).collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols()]; self.nrows()];
        for (r, c, v) in self.triplets() {
            d[r][c] += v;
        }
        d
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius norm of `self − other`, allowing different patterns.
    pub fn frobenius_distance(&self, other: &CsrMatrix) -> f64 {
        assert_eq!((self.nrows(), self.ncols()), (other.nrows(), other.ncols()));
        let mut s = 0.0;
        for (r, c, v) in self.triplets() {
            let d = v - other.get(r, c);
            s += d * d;
        }
        for (r, c, v) in other.triplets() {
            if self.pattern.find(r, c).is_none() {
                s += v * v;
            }
        }
        s.sqrt()
    }

    /// Largest `|a_ij − a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let worst = self
            .triplets()
            .map(|(r, c, v)| (v - self.get(c, r)).abs())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// Dense-to-CSR helper mostly used by tests and small oracles.
pub fn from_dense(rows: &[Vec<f64>]) -> CsrMatrix {
    let ncols = rows.first().map_or(0, Vec::len);
    let sets: Vec<BTreeSet<usize>> = rows
        .iter()
        .map(|r| (0..ncols).filter(|&c| r[c] != 0.0).collect())
        .collect();
    let mut m = CsrMatrix::zeros(Arc::new(SparsityPattern::from_rows(ncols, &sets)));
    for (r, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v != 0.0 {
                m.add(r, c, v);
            }
        }
    }
    m
}
