//! Global assembly of the incremental block systems.

mod kernels;
mod loads;
mod sparse;
mod system;

pub use kernels::{Assembler, ElementFields, Increments, InitialSystem, Linearization};
pub use loads::{DirichletSet, LoadCase, LoadLevel, LoadProfile, TractionLoad};
pub use sparse::{from_dense, CsrMatrix, SparsityPattern};
pub use system::{apply_dirichlet, BlockPatterns, BlockSystem};
