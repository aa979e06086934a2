//! ADAPT-VQE: grow a product of exponentiated pool generators one operator at
//! a time, re-optimizing every angle after each addition.

use crate::emulator::{energy_and_gradient, CompiledAnsatz, Emulator};
use crate::error::{Error, Result};
use crate::fermion::{spin_adapted_pool, spin_orbital_pool, PoolKind, PoolOperator};
use crate::hamiltonian::MolecularHamiltonian;
use crate::pauli::{jordan_wigner, PauliSum};
use crate::state::{apply_pauli_sum, SectorOperator, Statevector};
use crate::symmetry::IrrepLabel;
use argmin::core::{CostFunction, Executor, Gradient, State};
use argmin::solver::linesearch::MoreThuenteLineSearch;
use argmin::solver::quasinewton::BFGS;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Mutex;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdaptSettings {
    /// Stop once the pool-gradient norm falls below this.
    pub epsilon: f64,
    pub max_iters: usize,
    /// Gradient-norm tolerance of each re-optimization.
    pub optimizer_gtol: f64,
    pub optimizer_max_iters: u64,
    pub pool: PoolKind,
    pub symmetry_filter: bool,
}

impl Default for AdaptSettings {
    fn default() -> Self {
        AdaptSettings {
            epsilon: 1e-3,
            max_iters: 200,
            optimizer_gtol: 1e-3,
            optimizer_max_iters: 500,
            pool: PoolKind::SpinAdapted,
            symmetry_filter: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AdaptAnsatz {
    pub operators: Vec<PoolOperator>,
    /// Index of each operator in the filtered pool.
    pub pool_indices: Vec<usize>,
    pub parameters: Vec<f64>,
    pub reference_bits: u64,
    pub energy: f64,
}

impl AdaptAnsatz {
    pub fn empty(reference_bits: u64, energy: f64) -> Self {
        AdaptAnsatz { operators: Vec::new(), pool_indices: Vec::new(), parameters: Vec::new(), reference_bits, energy }
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn compile(&self, emu: &Emulator) -> Result<CompiledAnsatz> {
        let generators = self
            .operators
            .iter()
            .map(|op| compile_generator(op, emu))
            .collect::<Result<Vec<_>>>()?;
        Ok(CompiledAnsatz { generators, parameters: self.parameters.clone() })
    }

    /// Sector amplitudes of U(theta)|HF>.
    pub fn state(&self, emu: &Emulator) -> Result<Vec<Complex64>> {
        Ok(self.compile(emu)?.apply(&emu.reference_vector()))
    }

    pub fn statevector(&self, emu: &Emulator) -> Result<Statevector> {
        emu.sector.scatter(&self.state(emu)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdaptIteration {
    pub operator: String,
    pub pool_index: usize,
    pub gradient_norm: f64,
    pub max_gradient: f64,
    pub energy: f64,
    pub optimizer_iterations: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdaptReport {
    pub reference_energy: f64,
    pub iterations: Vec<AdaptIteration>,
    pub final_gradient_norm: f64,
    pub pool_size: usize,
    pub pool_size_filtered: usize,
    pub converged: bool,
    pub max_iters_reached: bool,
    pub energy: f64,
}

fn compile_generator(op: &PoolOperator, emu: &Emulator) -> Result<SectorOperator> {
    emu.compile(&jordan_wigner(&op.generator(), emu.n_qubits())?)
}

/// Pool for a closed-shell reference occupying the lowest spatial orbitals.
pub fn build_pool(mh: &MolecularHamiltonian, kind: PoolKind) -> Result<Vec<PoolOperator>> {
    match kind {
        PoolKind::SpinAdapted => {
            if mh.n_electrons % 2 != 0 {
                return Err(Error::Parameter("the spin-adapted pool needs a closed-shell reference".into()));
            }
            let n_occ = mh.n_electrons / 2;
            let n_virt = mh.n_spin_orbitals / 2 - n_occ;
            Ok(spin_adapted_pool(n_occ, n_virt, &mh.so_irreps))
        }
        PoolKind::SpinOrbital => Ok(spin_orbital_pool(&mh.reference_space(), &mh.so_irreps)),
    }
}

/// Keep the operators that leave the irrep of the reference unchanged.
pub fn filter_pool_by_symmetry(pool: &[PoolOperator]) -> Vec<PoolOperator> {
    pool.iter().filter(|op| op.irrep == IrrepLabel::SYMMETRIC).cloned().collect()
}

/// <psi|[H, tau]|psi> for anti-Hermitian tau.
pub fn pool_gradient(psi: &Statevector, h: &PauliSum, tau: &PauliSum) -> Result<f64> {
    if !tau.is_anti_hermitian(1e-12) {
        return Err(Error::Contract("pool generator is not anti-Hermitian".into()));
    }
    let hpsi = apply_pauli_sum(h, psi)?;
    let tpsi = apply_pauli_sum(tau, psi)?;
    Ok(2.0 * hpsi.inner(&tpsi)?.re)
}

/// Same quantity on compiled sector operators.
pub fn sector_gradient(hpsi: &[Complex64], psi: &[Complex64], tau: &SectorOperator) -> f64 {
    2.0 * crate::state::dot(hpsi, &tau.apply(psi)).re
}

/// E at the ansatz parameters.
pub fn vqe_energy(ansatz: &AdaptAnsatz, emu: &Emulator) -> Result<f64> {
    Ok(emu.energy(&ansatz.state(emu)?))
}

struct Objective<'a> {
    emu: &'a Emulator,
    generators: Vec<&'a SectorOperator>,
    cache: Mutex<Option<(Vec<f64>, f64, Vec<f64>)>>,
    best: &'a Mutex<(Vec<f64>, f64)>,
}

impl Objective<'_> {
    fn evaluate(&self, p: &[f64]) -> (f64, Vec<f64>) {
        let mut cache = self.cache.lock().unwrap();
        if let Some((q, e, g)) = cache.as_ref() {
            if q.as_slice() == p {
                return (*e, g.clone());
            }
        }
        let (e, g) = energy_and_gradient(self.emu, &self.generators, p);
        let mut best = self.best.lock().unwrap();
        if e < best.1 {
            *best = (p.to_vec(), e);
        }
        *cache = Some((p.to_vec(), e, g.clone()));
        (e, g)
    }
}

impl CostFunction for Objective<'_> {
    type Param = Vec<f64>;
    type Output = f64;
    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        Ok(self.evaluate(p).0)
    }
}

impl Gradient for Objective<'_> {
    type Param = Vec<f64>;
    type Gradient = Vec<f64>;
    fn gradient(&self, p: &Self::Param) -> std::result::Result<Vec<f64>, argmin::core::Error> {
        Ok(self.evaluate(p).1)
    }
}

/// Minimize over all angles from `start`. Returns (angles, energy, iterations).
fn optimize(
    emu: &Emulator,
    generators: Vec<&SectorOperator>,
    start: Vec<f64>,
    start_energy: f64,
    settings: &AdaptSettings,
) -> (Vec<f64>, f64, u64) {
    let n = start.len();
    let best = Mutex::new((start.clone(), start_energy));
    let objective = Objective { emu, generators, cache: Mutex::new(None), best: &best };
    let eye: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let solver = BFGS::new(MoreThuenteLineSearch::new())
        .with_tolerance_grad(settings.optimizer_gtol)
        .and_then(|s| s.with_tolerance_cost(0.0));
    let mut iterations = 0;
    if let Ok(solver) = solver {
        let run = Executor::new(objective, solver)
            .configure(|state| state.param(start).inv_hessian(eye).max_iters(settings.optimizer_max_iters))
            .run();
        match run {
            Ok(res) => iterations = res.state().get_iter(),
            Err(e) => log::debug!("optimizer stopped early: {e}"),
        }
    }
    let (p, e) = best.into_inner().unwrap();
    (p, e, iterations)
}

/// Run ADAPT-VQE on `mh` from its Hartree-Fock determinant.
pub fn run_adapt(
    mh: &MolecularHamiltonian,
    emu: &Emulator,
    settings: &AdaptSettings,
) -> Result<(AdaptAnsatz, AdaptReport)> {
    if settings.epsilon <= 0.0 {
        return Err(Error::Parameter("ADAPT threshold must be positive".into()));
    }
    let full = build_pool(mh, settings.pool)?;
    let pool = if settings.symmetry_filter { filter_pool_by_symmetry(&full) } else { full.clone() };
    if pool.is_empty() {
        return Err(Error::Parameter("operator pool is empty".into()));
    }
    let compiled = pool.iter().map(|op| compile_generator(op, emu)).collect::<Result<Vec<_>>>()?;
    let reference_energy = emu.energy(&emu.reference_vector());
    let mut ansatz = AdaptAnsatz::empty(emu.reference_bits, reference_energy);
    let mut report = AdaptReport {
        reference_energy,
        iterations: Vec::new(),
        final_gradient_norm: 0.0,
        pool_size: full.len(),
        pool_size_filtered: pool.len(),
        converged: false,
        max_iters_reached: false,
        energy: reference_energy,
    };
    let mut psi = emu.reference_vector();
    loop {
        let hpsi = emu.hamiltonian.apply(&psi);
        let grads: Vec<f64> = compiled.iter().map(|t| sector_gradient(&hpsi, &psi, t)).collect();
        let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
        report.final_gradient_norm = norm;
        if norm < settings.epsilon {
            report.converged = true;
            break;
        }
        if report.iterations.len() >= settings.max_iters {
            report.max_iters_reached = true;
            log::warn!("ADAPT stopped after {} iterations with gradient norm {norm:e}", settings.max_iters);
            break;
        }
        let mut pick = 0;
        for (k, g) in grads.iter().enumerate() {
            if g.abs() > grads[pick].abs() {
                pick = k;
            }
        }
        ansatz.operators.push(pool[pick].clone());
        ansatz.pool_indices.push(pick);
        let mut start = ansatz.parameters.clone();
        start.push(0.0);
        let gens: Vec<&SectorOperator> = ansatz.pool_indices.iter().map(|&k| &compiled[k]).collect();
        let (params, energy, its) = optimize(emu, gens, start, ansatz.energy, settings);
        ansatz.parameters = params;
        ansatz.energy = energy;
        log::info!("ADAPT {:3}: {} |g|={norm:.3e} E={energy:.12}", report.iterations.len() + 1, pool[pick].label);
        report.iterations.push(AdaptIteration {
            operator: pool[pick].label.clone(),
            pool_index: pick,
            gradient_norm: norm,
            max_gradient: grads[pick].abs(),
            energy,
            optimizer_iterations: its,
        });
        let mut cur = emu.reference_vector();
        for (&k, &t) in ansatz.pool_indices.iter().zip(&ansatz.parameters) {
            cur = crate::state::exp_apply(&compiled[k], t, &cur);
        }
        psi = cur;
    }
    report.energy = ansatz.energy;
    Ok((ansatz, report))
}
