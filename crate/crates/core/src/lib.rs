//! Particle + harmonic-bath models viewed through two mutually irreducible
//! tensor-product structures, with exact Gaussian dynamics and a brute-force
//! Fock-space cross-check.

pub mod error;
pub mod experiments;
pub mod fock;
pub mod gaussian;
pub mod linalg;
pub mod model;
pub mod structure;

pub use error::{Error, Result};
pub use gaussian::{CatState, Complex64, Evolve, GaussianState};
pub use model::{BathMode, BathSpec, CouplingSign, GridScheme, ModelParams, Potential, QuadraticHamiltonian};
pub use structure::{IrreducibilityReport, RelativeBasis, StructureMap};
