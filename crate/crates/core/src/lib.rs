//! Classical simulation of quantum full configuration interaction (qFCI):
//! molecular Hamiltonians are mapped onto qubits and their energies are
//! extracted by simulated phase estimation, with exact diagonalization as
//! the reference.

pub mod error;
pub mod hamio;
pub mod secondq;
pub mod circuit;
pub mod sim;
pub mod phase;
pub mod prep;

pub use error::{Error, Result};
