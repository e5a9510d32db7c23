use std::ops::{Add, Index, IndexMut};

use nalgebra::Matrix3;

/// Dense fourth-order tensor on R³, stored row-major in (i, j, k, l).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor4([f64; 81]);

#[inline]
fn flat(i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * 3 + j) * 3 + k) * 3 + l
}

impl Tensor4 {
    pub fn zeros() -> Self {
        Self([0.0; 81])
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..3 {
                        t.0[flat(i, j, k, l)] = f(i, j, k, l);
                    }
                }
            }
        }
        t
    }

    /// `(T : e)_ij = T_ijkl e_kl`.
    pub fn contract(&self, e: &Matrix3<f64>) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| {
            let mut s = 0.0;
            for k in 0..3 {
                for l in 0..3 {
                    s += self.0[flat(i, j, k, l)] * e[(k, l)];
                }
            }
            s
        })
    }

    pub fn scale(&self, a: f64) -> Self {
        let mut out = *self;
        out.0.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// Largest absolute component.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Index<(usize, usize, usize, usize)> for Tensor4 {
    type Output = f64;

    fn index(&self, (i, j, k, l): (usize, usize, usize, usize)) -> &f64 {
        &self.0[flat(i, j, k, l)]
    }
}

impl IndexMut<(usize, usize, usize, usize)> for Tensor4 {
    fn index_mut(&mut self, (i, j, k, l): (usize, usize, usize, usize)) -> &mut f64 {
        &mut self.0[flat(i, j, k, l)]
    }
}

impl Add for Tensor4 {
    type Output = Tensor4;

    fn add(mut self, rhs: Tensor4) -> Tensor4 {
        self.0.iter_mut().zip(rhs.0).for_each(|(a, b)| *a += b);
        self
    }
}

pub(crate) fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}
