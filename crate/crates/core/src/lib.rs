//! Release and recapture of multiphoton states from a Kerr-nonlinear
//! superconducting emitter.
//!
//! The crate is layered: [`quantum`] holds the truncated Fock-space algebra,
//! [`dynamics`] integrates time-dependent Lindblad models, [`emission`]
//! analyses the radiated field, [`circuit`] derives effective Hamiltonians
//! from circuit values and [`capture`] simulates a virtual receiver.

pub mod capture;
pub mod circuit;
pub mod dynamics;
pub mod emission;
pub mod error;
pub mod flat;
pub mod harness;
pub mod quantum;
pub mod units;

pub use error::{Error, Result};
