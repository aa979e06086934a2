//! Statevector emulation: a dense register for the public contract and a
//! compiled fixed-(N, S_z) sector for the heavy lifting.

mod sector;
mod vector;

pub use sector::{exp_apply, Sector, SectorOperator};
pub use vector::{
    apply_exp_generator, apply_pauli_sum, expectation, prepare_determinant, transition_element, Statevector,
    MAX_QUBITS,
};

use num_complex::Complex64;

/// Taylor terms below this norm end the series.
pub const TAYLOR_CUTOFF: f64 = 1e-13;

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}
