//! Validation oracles: the small-strain Biot model and the closed-form
//! steady compression of a confined column.

mod analytic;
mod linear;

pub use analytic::analytic_compression;
pub use linear::{LinearBiotSystem, LinearScheme, LinearState, LinearStepper, NewmarkParams};
