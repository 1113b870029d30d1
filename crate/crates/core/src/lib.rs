//! Circuit synthesis for arbitrary pure and mixed quantum states.
//!
//! The pipeline turns a state description (state vector, ensemble of pure
//! states, or density matrix) into an explicit gate-level circuit built from
//! uniformly controlled rotations, CSWAP mixing ladders, and purification
//! blocks. Density matrices are preprocessed with a pivoted Cholesky
//! factorization (or an incomplete one with threshold dropping for
//! high-fidelity approximate preparation), and every circuit can be checked
//! against its target with the bundled state-vector and density-matrix
//! simulators.

pub mod cholesky;
pub mod circuit;
pub mod error;
pub mod linalg;
pub mod mixedsynth;
pub mod puresynth;
pub mod qasm;
pub mod sim;
#[cfg(test)]
pub(crate) mod testutil;

pub use cholesky::{CholeskyFactor, Ensemble, FactorKind, FactorMatrix};
pub use circuit::{Axis, Circuit, Gate, GateCountReport, LowerOptions, Polarity};
pub use error::Error;
pub use linalg::{ComplexMatrix, DensityMatrix, StateVector};
