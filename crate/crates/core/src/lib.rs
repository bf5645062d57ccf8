//! Local-unitary equivalence of multi-particle density matrices.
//!
//! The crate counts non-local parameters for arbitrary qudit systems from the
//! rank of the orbit tangent frame, and for two and three qubits computes
//! canonical orbit representatives, a finite separating family of polynomial
//! invariants, and the inverse map from invariants back to the canonical
//! point.

pub mod bloch;
pub mod canonical;
pub mod equivalence;
pub mod error;
pub mod format;
pub mod invariants;
pub mod local_action;
pub mod orbit_dim;
pub mod reconstruct;
pub mod states;

pub use error::{Error, Result};
