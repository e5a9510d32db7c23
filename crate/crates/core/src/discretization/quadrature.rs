//! Gauss-Legendre rules on the reference interval and square.

use crate::error::{Error, Result};

/// Tensor-product quadrature on the reference square [-1, 1]².
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// Highest per-variable polynomial degree integrated exactly.
    pub degree: usize,
}

/// One-dimensional Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    pub fn gauss(n: usize) -> Result<Self> {
        let (points, weights) = match n {
            1 => (vec![0.0], vec![2.0]),
            2 => {
                let a = 1.0 / 3f64.sqrt();
                (vec![-a, a], vec![1.0, 1.0])
            }
            3 => {
                let a = (3.0f64 / 5.0).sqrt();
                (vec![-a, 0.0, a], vec![5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0])
            }
            4 => {
                let s = (6.0f64 / 5.0).sqrt();
                let a = ((3.0 - 2.0 * s) / 7.0).sqrt();
                let b = ((3.0 + 2.0 * s) / 7.0).sqrt();
                let wa = (18.0 + 30f64.sqrt()) / 36.0;
                let wb = (18.0 - 30f64.sqrt()) / 36.0;
                (vec![-b, -a, a, b], vec![wb, wa, wa, wb])
            }
            5 => {
                let s = (10.0f64 / 7.0).sqrt();
                let a = (5.0 - 2.0 * s).sqrt() / 3.0;
                let b = (5.0 + 2.0 * s).sqrt() / 3.0;
                let r = 70f64.sqrt();
                let wa = (322.0 + 13.0 * r) / 900.0;
                let wb = (322.0 - 13.0 * r) / 900.0;
                (vec![-b, -a, 0.0, a, b], vec![wb, wa, 128.0 / 225.0, wa, wb])
            }
            _ => {
                return Err(Error::InvalidInput(format!(
                    "Gauss rule with {n} points is not tabulated (1..=5)"
                )))
            }
        };
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl QuadratureRule {
    /// n×n Gauss rule; exact for ξ^a η^b with a, b ≤ 2n - 1.
    pub fn gauss(n: usize) -> Result<Self> {
        let line = LineRule::gauss(n)?;
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&eta, &wj) in line.points.iter().zip(&line.weights) {
            for (&xi, &wi) in line.points.iter().zip(&line.weights) {
                points.push([xi, eta]);
                weights.push(wi * wj);
            }
        }
        Ok(Self {
            points,
            weights,
            degree: 2 * n - 1,
        })
    }

    /// The 3×3 rule used for every volume integral.
    pub fn volume_default() -> Self {
        Self::gauss(3).expect("3-point rule is tabulated")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact_monomial(a: i32) -> f64 {
        if a % 2 == 1 {
            0.0
        } else {
            2.0 / (a as f64 + 1.0)
        }
    }

    #[test]
    fn weights_sum_to_reference_area() {
        for n in 1..=5 {
            let rule = QuadratureRule::gauss(n).unwrap();
            let s: f64 = rule.weights.iter().sum();
            assert!((s - 4.0).abs() < 1e-14, "n = {n}: {s}");
        }
    }

    #[test]
    fn three_point_rule_integrates_degree_five() {
        let rule = QuadratureRule::volume_default();
        assert_eq!(rule.degree, 5);
        for a in 0..=5 {
            for b in 0..=5 {
                let exact = exact_monomial(a) * exact_monomial(b);
                let got = rule.integrate(|x, y| x.powi(a) * y.powi(b));
                let err = if exact == 0.0 {
                    got.abs()
                } else {
                    ((got - exact) / exact).abs()
                };
                assert!(err <= 1e-13, "monomial x^{a} y^{b}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn higher_rules_are_exact_to_declared_degree() {
        for n in 1..=5 {
            let line = LineRule::gauss(n).unwrap();
            for a in 0..(2 * n as i32) {
                let got: f64 = line
                    .points
                    .iter()
                    .zip(&line.weights)
                    .map(|(x, w)| w * x.powi(a))
                    .sum();
                assert!((got - exact_monomial(a)).abs() < 1e-13, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn untabulated_rule_rejected() {
        assert!(LineRule::gauss(0).is_err());
        assert!(QuadratureRule::gauss(6).is_err());
    }
}
