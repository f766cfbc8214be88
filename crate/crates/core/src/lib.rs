//! Quantum fingerprinting for the MOD_p finite automaton.
//!
//! Coefficient sets over `Z_p`, their exact error profile, the circuits that
//! realize them, statevector and density-matrix simulation, and parameter search.

pub mod circuit;
pub mod coeffgen;
pub mod error;
pub mod optimize;
pub mod sim;
pub mod spectral;
pub mod zp;

pub use circuit::{Circuit, Gate, Metrics};
pub use coeffgen::{CoefficientSet, ParamVector, Provenance};
pub use error::{Error, Result};
pub use spectral::ErrorProfile;
pub use zp::Prime;
