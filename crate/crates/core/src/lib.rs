//! Simulator for a Bell-measurement-free quantum repeater built from chains
//! of double quantum dots.
//!
//! Adjacent singlet pairs are joined by coupling their two middle dots to a
//! detuned cavity for a quarter exchange period and then measuring both
//! middle dots in the `{g, e}` product basis. Half of the outcomes leave the
//! outer dots maximally entangled, and the two possible output states are
//! closed under further swapping, so the procedure can be iterated to double
//! the entanglement span at every level.
//!
//! Module map:
//!
//! - [`hilbert`] dense state vectors, operators and density matrices over
//!   labeled tensor-product spaces.
//! - [`model`] Tavis–Cummings and dispersive effective Hamiltonians.
//! - [`measure`] projective `{g, e}` measurement, exhaustive or sampled.
//! - [`protocol`] singlets, the swap step, chain doubling and closure.
//! - [`analysis`] fidelity, concurrence, Monte Carlo statistics, sweeps.
//! - [`runner`] configuration, command dispatch and JSON/CSV output.

pub mod analysis;
pub mod error;
pub mod hilbert;
pub mod measure;
pub mod model;
pub mod protocol;
pub mod runner;

pub use error::{Error, Result};
pub use hilbert::{DensityMatrix, OperatorKind, OperatorMatrix, StateVector, C64};
