//! Compressible neo-Hookean skeleton.

use nalgebra::Matrix3;

use super::params::SolidParams;
use super::tensor::{delta, Tensor4};
use crate::error::{Error, Result};

pub(crate) fn jacobian_of(f: &Matrix3<f64>) -> Result<f64> {
    let j = f.determinant();
    if j > 0.0 && j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NonPhysical(format!(
            "deformation gradient with det F = {j:.6e}"
        )))
    }
}

/// Effective Cauchy stress `J⁻¹[μ b + (λ ln J − μ) I]`.
pub fn effective_stress(f: &Matrix3<f64>, solid: &SolidParams) -> Result<Matrix3<f64>> {
    let j = jacobian_of(f)?;
    let b = f * f.transpose();
    Ok((b * solid.mu + Matrix3::identity() * (solid.lambda * j.ln() - solid.mu)) / j)
}

/// Spatial tangent relating the Truesdell rate of the effective stress to
/// the rate of deformation.
pub fn tangent_stiffness(f: &Matrix3<f64>, solid: &SolidParams) -> Result<Tensor4> {
    let j = jacobian_of(f)?;
    let lam = solid.lambda / j;
    let shear = (solid.mu - solid.lambda * j.ln()) / j;
    Ok(Tensor4::from_fn(|i, jj, k, l| {
        lam * delta(i, jj) * delta(k, l)
            + shear * (delta(i, k) * delta(jj, l) + delta(i, l) * delta(jj, k))
    }))
}

/// Stored energy per unit reference volume.
pub fn strain_energy_density(f: &Matrix3<f64>, solid: &SolidParams) -> Result<f64> {
    let j = jacobian_of(f)?;
    let b = f * f.transpose();
    let lnj = j.ln();
    Ok(0.5 * solid.mu * (b.trace() - 3.0) - solid.mu * lnj + 0.5 * solid.lambda * lnj * lnj)
}
