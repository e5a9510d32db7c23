//! Pointwise material laws of the saturated mixture.

mod coefficients;
mod hyperelastic;
mod params;
mod tensor;

pub use coefficients::{
    a_tilde, b_tilde, biot_coefficients, coefficient_variations, fluid_density, k_hat, k_tilde,
    porosity_and_density, r_tilde, BiotCoefficients, CoefficientSet, CoefficientVariations,
    MaterialPoint, Porosity,
};
pub use hyperelastic::{effective_stress, strain_energy_density, tangent_stiffness};
pub use params::{FluidParams, SolidParams};
pub use tensor::Tensor4;
