//! Finite-strain Biot poroelasticity with a mixed Q2–Q1 discretization and
//! an updated-Lagrangian predictor–corrector time integrator.

pub mod assembly;
pub mod cases;
pub mod cli;
pub mod constitutive;
pub mod discretization;
pub mod error;
pub mod postproc;
pub mod reference;
pub mod stepping;

pub use error::{Error, Result};
