//! Numerical engine for Bell-inequality tests on coupled Josephson charge qubits.
//!
//! Two qubits evolve from `|00>` under
//! `H = B (σx⊗I + I⊗σx) + J σy⊗σy` and are read out after local rotations.
//! From the readout statistics the crate builds Q functions, the CHSH
//! combination Γ and the concurrence, both exactly and from simulated shots.

pub mod chsh;
pub mod entanglement;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod linalg;
pub mod measurement;
pub mod model;
pub mod phase_space;

pub use error::{Error, Result};
pub use linalg::{HermitianOperator, Matrix, PureState, UnitaryOperator, C64};
