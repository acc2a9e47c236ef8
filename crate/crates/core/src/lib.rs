//! Unitary and traditional coupled-cluster doubles methods over an exact
//! determinant representation, with perturbative singles corrections.

pub mod amplitudes;
pub mod bench;
pub mod cc;
pub mod ansatz;
pub mod error;
pub mod fcidump;
pub mod fci;
pub mod hamiltonian;
pub mod sector;
pub mod singles;
pub mod vqe;

pub use error::{Error, Result};
