//! Operators compiled onto the (N, S_z) sector of a reference determinant.

use crate::error::Result;
use crate::pauli::PauliSum;
use crate::state::{exp_apply, Sector, SectorOperator};
use num_complex::Complex64;

/// Hamiltonian and sector of one calculation.
#[derive(Clone, Debug)]
pub struct Emulator {
    pub sector: Sector,
    pub hamiltonian: SectorOperator,
    pub reference_bits: u64,
}

impl Emulator {
    pub fn new(h: &PauliSum, reference_bits: u64) -> Result<Self> {
        let sector = Sector::containing(h.n_qubits(), reference_bits)?;
        let hamiltonian = SectorOperator::compile(h, &sector)?;
        Ok(Emulator { sector, hamiltonian, reference_bits })
    }

    pub fn n_qubits(&self) -> usize {
        self.sector.n_qubits()
    }

    pub fn reference_vector(&self) -> Vec<Complex64> {
        self.sector.basis_vector(self.reference_bits).expect("reference lies in its own sector")
    }

    pub fn compile(&self, op: &PauliSum) -> Result<SectorOperator> {
        SectorOperator::compile(op, &self.sector)
    }

    /// <v|H|v> / <v|v>
    pub fn energy(&self, v: &[Complex64]) -> f64 {
        let n2: f64 = v.iter().map(|x| x.norm_sqr()).sum();
        self.hamiltonian.quadratic(v).re / n2
    }
}

/// U(theta) = exp(theta_n tau_n) ... exp(theta_1 tau_1) on the sector.
#[derive(Clone, Debug)]
pub struct CompiledAnsatz {
    pub generators: Vec<SectorOperator>,
    pub parameters: Vec<f64>,
}

impl CompiledAnsatz {
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut cur = v.to_vec();
        for (g, &t) in self.generators.iter().zip(&self.parameters) {
            cur = exp_apply(g, t, &cur);
        }
        cur
    }

    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut cur = v.to_vec();
        for (g, &t) in self.generators.iter().zip(&self.parameters).rev() {
            cur = exp_apply(g, -t, &cur);
        }
        cur
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

/// Energy and its gradient with respect to every parameter, by one forward
/// and one backward sweep.
pub fn energy_and_gradient(
    emu: &Emulator,
    generators: &[&SectorOperator],
    parameters: &[f64],
) -> (f64, Vec<f64>) {
    let mut psi = emu.reference_vector();
    for (g, &t) in generators.iter().zip(parameters) {
        psi = exp_apply(g, t, &psi);
    }
    let mut sigma = emu.hamiltonian.apply(&psi);
    let energy = crate::state::dot(&psi, &sigma).re;
    let mut grad = vec![0.0; parameters.len()];
    for k in (0..generators.len()).rev() {
        let tpsi = generators[k].apply(&psi);
        grad[k] = 2.0 * crate::state::dot(&sigma, &tpsi).re;
        if k > 0 {
            psi = exp_apply(&generators[k], -parameters[k], &psi);
            sigma = exp_apply(&generators[k], -parameters[k], &sigma);
        }
    }
    (energy, grad)
}
