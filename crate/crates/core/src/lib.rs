//! Excited states from an ADAPT-VQE reference by qEOM and QSE on a
//! statevector emulator, with symmetry-reduced and screened triple excitations.

pub mod error;
pub mod fermion;
pub mod pauli;
pub mod symmetry;

pub use error::{Error, Result};
pub mod hamiltonian;
pub mod state;
pub mod linalg;
pub mod fci;
pub mod emulator;
pub mod adapt;
pub mod qeom;
pub mod qse;
pub mod config;
pub mod pipeline;

