use nalgebra::Matrix3;

use super::hyperelastic::{effective_stress, jacobian_of, tangent_stiffness};
use super::params::{FluidParams, SolidParams};
use super::tensor::{delta, Tensor4};
use crate::error::{Error, Result};

pub fn fluid_density(p: f64, fluid: &FluidParams) -> f64 {
    fluid.rho_f0 * ((p - fluid.p0) / fluid.kappa_f).exp()
}

/// Volume fractions and mixture density at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Porosity {
    pub phi_s: f64,
    pub phi: f64,
    pub rho_f: f64,
    pub rho_bar: f64,
}

pub fn porosity_and_density(
    j: f64,
    p: f64,
    solid: &SolidParams,
    fluid: &FluidParams,
) -> Result<Porosity> {
    if !(j > 0.0) {
        return Err(Error::NonPhysical(format!("volume ratio J = {j:.6e}")));
    }
    let phi_s = solid.phi_s0 / j;
    let phi = 1.0 - phi_s;
    if !(phi > 0.0) {
        return Err(Error::NonPhysical(format!(
            "porosity {phi:.6e} at J = {j:.6e} (pores closed)"
        )));
    }
    let rho_f = fluid_density(p, fluid);
    Ok(Porosity {
        phi_s,
        phi,
        rho_f,
        rho_bar: phi * rho_f + phi_s * solid.rho_s0,
    })
}

/// Compressibility, coupling and permeability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiotCoefficients {
    pub m: f64,
    pub b: Matrix3<f64>,
    pub k: Matrix3<f64>,
}

pub fn biot_coefficients(j: f64, phi: f64, fluid: &FluidParams) -> Result<BiotCoefficients> {
    if !(j > 0.0) {
        return Err(Error::NonPhysical(format!("volume ratio J = {j:.6e}")));
    }
    Ok(BiotCoefficients {
        m: phi / fluid.kappa_f,
        b: Matrix3::identity(),
        k: Matrix3::identity() * (fluid.k0 * (fluid.varkappa * (j - 1.0)).exp()),
    })
}

/// First-order changes of the coefficients under a convection increment
/// with divergence `div_u_star`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientVariations {
    pub dm: f64,
    pub db: Matrix3<f64>,
    pub dk: Matrix3<f64>,
}

pub fn coefficient_variations(
    j: f64,
    div_u_star: f64,
    fluid: &FluidParams,
    solid: &SolidParams,
) -> Result<CoefficientVariations> {
    if !(j > 0.0) {
        return Err(Error::NonPhysical(format!("volume ratio J = {j:.6e}")));
    }
    let scale = j * fluid.varkappa * fluid.k0 * (fluid.varkappa * (j - 1.0)).exp();
    Ok(CoefficientVariations {
        dm: -solid.phi_s0 / (j * fluid.kappa_f) * div_u_star,
        db: Matrix3::zeros(),
        dk: Matrix3::identity() * (scale * div_u_star),
    })
}

/// State at one quadrature point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialPoint {
    /// Plane-strain deformation gradient (`F₃₃ = 1`).
    pub f: Matrix3<f64>,
    pub j: f64,
    pub b: Matrix3<f64>,
    pub p: f64,
    pub phi: f64,
    pub rho_f: f64,
    pub rho_bar: f64,
    pub sigma_eff: Matrix3<f64>,
}

impl MaterialPoint {
    /// `grad_x_u` is `∂u_i/∂X_j` in the plane.
    pub fn from_displacement_gradient(
        grad_x_u: [[f64; 2]; 2],
        p: f64,
        solid: &SolidParams,
        fluid: &FluidParams,
    ) -> Result<Self> {
        let mut f = Matrix3::identity();
        for i in 0..2 {
            for j in 0..2 {
                f[(i, j)] += grad_x_u[i][j];
            }
        }
        Self::new(f, p, solid, fluid)
    }

    pub fn new(f: Matrix3<f64>, p: f64, solid: &SolidParams, fluid: &FluidParams) -> Result<Self> {
        let j = jacobian_of(&f)?;
        let por = porosity_and_density(j, p, solid, fluid)?;
        Ok(Self {
            f,
            j,
            b: f * f.transpose(),
            p,
            phi: por.phi,
            rho_f: por.rho_f,
            rho_bar: por.rho_bar,
            sigma_eff: effective_stress(&f, solid)?,
        })
    }

    /// Total stress `σ^eff − p B` with `B = I`.
    pub fn total_stress(&self) -> Matrix3<f64> {
        self.sigma_eff - Matrix3::identity() * self.p
    }
}

/// Coefficients, their variations and the modified tensors of the
/// incremental forms, all at one linearization point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub m: f64,
    pub b: Matrix3<f64>,
    pub k: Matrix3<f64>,
    pub dm: f64,
    pub db: Matrix3<f64>,
    pub dk: Matrix3<f64>,
    pub a_tilde: Tensor4,
    pub b_tilde: Matrix3<f64>,
    pub k_tilde: Matrix3<f64>,
    pub k_hat: Matrix3<f64>,
    pub m_tilde: f64,
    pub r_tilde: f64,
}

/// `B(∇·v − ∇vᵀ)`.
pub fn b_tilde(b: &Matrix3<f64>, grad_v: &Matrix3<f64>) -> Matrix3<f64> {
    b * (Matrix3::identity() * grad_v.trace() - grad_v.transpose())
}

/// `(∇·v) K − K ∇vᵀ − ∇v K`.
pub fn k_tilde(k: &Matrix3<f64>, grad_v: &Matrix3<f64>) -> Matrix3<f64> {
    k * grad_v.trace() - k * grad_v.transpose() - grad_v * k
}

/// `[I (q/κ_f + ∇·v) − ∇v] K`.
pub fn k_hat(k: &Matrix3<f64>, grad_v: &Matrix3<f64>, q: f64, kappa_f: f64) -> Matrix3<f64> {
    (Matrix3::identity() * (q / kappa_f + grad_v.trace()) - grad_v) * k
}

/// `Ã = D + σ_lj δ_ki + p̂ (B_il δ_jk − B_ij δ_kl)`.
pub fn a_tilde(d: &Tensor4, sigma_eff: &Matrix3<f64>, b: &Matrix3<f64>, p_hat: f64) -> Tensor4 {
    Tensor4::from_fn(|i, j, k, l| {
        d[(i, j, k, l)]
            + sigma_eff[(l, j)] * delta(k, i)
            + p_hat * (b[(i, l)] * delta(j, k) - b[(i, j)] * delta(k, l))
    })
}

/// Mixture-density perturbation `(ρ_f − ρ_s)(1 − φ) ∇·v + φ ρ_f q / κ_f`.
pub fn r_tilde(point: &MaterialPoint, solid: &SolidParams, fluid: &FluidParams, div_v: f64, q: f64) -> f64 {
    (point.rho_f - solid.rho_s0) * (1.0 - point.phi) * div_v + point.phi * point.rho_f * q / fluid.kappa_f
}

impl CoefficientSet {
    /// `u_star_grad` is the spatial gradient of the convection increment,
    /// `p_star` its pressure counterpart; `p̂` is the pressure of `point`.
    pub fn evaluate(
        point: &MaterialPoint,
        solid: &SolidParams,
        fluid: &FluidParams,
        u_star_grad: &Matrix3<f64>,
        p_star: f64,
    ) -> Result<Self> {
        let d = tangent_stiffness(&point.f, solid)?;
        let base = biot_coefficients(point.j, point.phi, fluid)?;
        let div = u_star_grad.trace();
        let var = coefficient_variations(point.j, div, fluid, solid)?;
        Ok(Self::assemble(point, solid, fluid, &d, &base, &var, u_star_grad, p_star))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        point: &MaterialPoint,
        solid: &SolidParams,
        fluid: &FluidParams,
        d_eff: &Tensor4,
        base: &BiotCoefficients,
        var: &CoefficientVariations,
        u_star_grad: &Matrix3<f64>,
        p_star: f64,
    ) -> Self {
        let div = u_star_grad.trace();
        Self {
            m: base.m,
            b: base.b,
            k: base.k,
            dm: var.dm,
            db: var.db,
            dk: var.dk,
            a_tilde: a_tilde(d_eff, &point.sigma_eff, &base.b, point.p),
            b_tilde: b_tilde(&base.b, u_star_grad),
            k_tilde: k_tilde(&base.k, u_star_grad),
            k_hat: k_hat(&base.k, u_star_grad, p_star, fluid.kappa_f),
            m_tilde: base.m * div,
            r_tilde: r_tilde(point, solid, fluid, div, p_star),
        }
    }
}
