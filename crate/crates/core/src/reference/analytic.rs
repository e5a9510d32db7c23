use crate::error::{Error, Result};

const LOWER: f64 = -0.99;
const UPPER: f64 = 10.0;

/// Vertical Cauchy stress plus the applied pressure for a laterally
/// confined neo-Hookean column with axial strain `e`.
fn residual(lambda: f64, mu: f64, hbar: f64, e: f64) -> f64 {
    let s = 1.0 + e;
    s * mu + (lambda * s.ln() - mu) / s + hbar
}

fn derivative(lambda: f64, mu: f64, e: f64) -> f64 {
    let s = 1.0 + e;
    mu + (lambda * (1.0 - s.ln()) + mu) / (s * s)
}

/// Steady axial strain of a laterally confined column under the
/// compressive surface pressure `hbar`, found by bisection on
/// `(−0.99, 10)` followed by Newton polishing. The residual is driven
/// below `1e−12·(λ + 2μ)`.
pub fn analytic_compression(lambda: f64, mu: f64, hbar: f64) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0 && hbar.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "need positive Lamé moduli and finite load, got λ={lambda}, μ={mu}, h={hbar}"
        )));
    }
    let f = |e| residual(lambda, mu, hbar, e);
    let (mut lo, mut hi) = (LOWER, UPPER);
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidInput(format!(
            "no sign change of the compression residual on ({LOWER}, {UPPER}): f = {flo:.3e}, {fhi:.3e}"
        )));
    }
    let tol = 1e-12 * (lambda + 2.0 * mu);
    for _ in 0..200 {
        if hi - lo < 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut e = 0.5 * (lo + hi);
    for _ in 0..50 {
        let r = f(e);
        if r.abs() <= tol {
            return Ok(e);
        }
        let next = e - r / derivative(lambda, mu, e);
        e = next.clamp(lo - 1e-6, hi + 1e-6);
    }
    let r = f(e);
    if r.abs() <= tol {
        Ok(e)
    } else {
        Err(Error::InvalidInput(format!("compression root did not converge, residual {r:.3e}")))
    }
}
