use super::vector::{Statevector, MAX_QUBITS};
use super::{norm, TAYLOR_CUTOFF};
use crate::error::{Error, Result};
use crate::pauli::{number_operator, sz_operator, PauliSum};
use num_complex::Complex64;
use std::collections::HashMap;

const CONSERVATION_TOL: f64 = 1e-12;

/// Basis states with fixed alpha (even qubit) and beta (odd qubit) counts.
#[derive(Clone, Debug)]
pub struct Sector {
    n_qubits: usize,
    n_alpha: usize,
    n_beta: usize,
    states: Vec<u64>,
    index: HashMap<u64, u32>,
}

fn spread(combo: u64, offset: usize) -> u64 {
    let mut out = 0;
    let mut c = combo;
    while c != 0 {
        let p = c.trailing_zeros() as usize;
        out |= 1 << (2 * p + offset);
        c &= c - 1;
    }
    out
}

fn combos(n: usize, k: usize) -> Vec<u64> {
    (0u64..1 << n).filter(|m| m.count_ones() as usize == k).collect()
}

impl Sector {
    pub fn new(n_qubits: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::QubitCeiling { n_qubits, max: MAX_QUBITS });
        }
        if n_qubits % 2 != 0 || n_alpha > n_qubits / 2 || n_beta > n_qubits / 2 {
            return Err(Error::Dimension(format!("{n_alpha} alpha and {n_beta} beta electrons in {n_qubits} spin orbitals")));
        }
        let m = n_qubits / 2;
        let alphas = combos(m, n_alpha);
        let betas = combos(m, n_beta);
        let mut states: Vec<u64> = Vec::with_capacity(alphas.len() * betas.len());
        for a in &alphas {
            for b in &betas {
                states.push(spread(*a, 0) | spread(*b, 1));
            }
        }
        states.sort_unstable();
        let index = states.iter().enumerate().map(|(i, &s)| (s, i as u32)).collect();
        Ok(Sector { n_qubits, n_alpha, n_beta, states, index })
    }

    /// Sector containing the given determinant.
    pub fn containing(n_qubits: usize, bits: u64) -> Result<Self> {
        let a = (bits & 0x5555_5555_5555_5555).count_ones() as usize;
        let b = (bits & 0xAAAA_AAAA_AAAA_AAAA).count_ones() as usize;
        Self::new(n_qubits, a, b)
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn electrons(&self) -> (usize, usize) {
        (self.n_alpha, self.n_beta)
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, bits: u64) -> Option<usize> {
        self.index.get(&bits).map(|&i| i as usize)
    }

    pub fn basis_vector(&self, bits: u64) -> Option<Vec<Complex64>> {
        let i = self.index_of(bits)?;
        let mut v = vec![Complex64::new(0.0, 0.0); self.dim()];
        v[i] = Complex64::new(1.0, 0.0);
        Some(v)
    }

    /// Restrict a dense state; amplitude outside the sector is an error.
    pub fn gather(&self, psi: &Statevector) -> Result<Vec<Complex64>> {
        if psi.n_qubits() != self.n_qubits {
            return Err(Error::Dimension(format!("{}-qubit state for a {}-qubit sector", psi.n_qubits(), self.n_qubits)));
        }
        let v: Vec<Complex64> = self.states.iter().map(|&s| psi.amplitude(s)).collect();
        let leak = (psi.norm().powi(2) - norm(&v).powi(2)).max(0.0).sqrt();
        if leak > 1e-10 {
            return Err(Error::Contract(format!("state has weight {leak:e} outside the sector")));
        }
        Ok(v)
    }

    pub fn scatter(&self, v: &[Complex64]) -> Result<Statevector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << self.n_qubits];
        for (&s, &a) in self.states.iter().zip(v) {
            amps[s as usize] = a;
        }
        Statevector::from_amplitudes(self.n_qubits, amps)
    }
}

/// A Pauli sum restricted to a sector it leaves invariant, in CSR form.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<Complex64>,
    norm_bound: f64,
}

impl SectorOperator {
    /// Compile `op` onto `sector`; `op` must commute with N and S_z.
    pub fn compile(op: &PauliSum, sector: &Sector) -> Result<Self> {
        if op.n_qubits() != sector.n_qubits {
            return Err(Error::Dimension(format!("{}-qubit operator on a {}-qubit sector", op.n_qubits(), sector.n_qubits)));
        }
        let n = op.n_qubits();
        for (name, q) in [("N", number_operator(n)), ("S_z", sz_operator(n))] {
            let defect = op.commutator(&q)?.max_abs_coefficient();
            if defect > CONSERVATION_TOL {
                return Err(Error::Contract(format!("operator does not conserve {name} (commutator {defect:e})")));
            }
        }
        Ok(Self::compile_unchecked(op, sector))
    }

    pub(crate) fn compile_unchecked(op: &PauliSum, sector: &Sector) -> Self {
        let groups = op.grouped_by_flip();
        let dim = sector.dim();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut norm_bound: f64 = 0.0;
        row_ptr.push(0);
        let mut row: Vec<(u32, Complex64)> = Vec::new();
        for &t in &sector.states {
            row.clear();
            for (x, zs) in &groups {
                // source b with X^x Z^z |b> proportional to |t>
                let b = t ^ x;
                let Some(j) = sector.index_of(b) else { continue };
                let mut d = Complex64::new(0.0, 0.0);
                for &(z, c) in zs {
                    if (b & z).count_ones() % 2 == 0 {
                        d += c;
                    } else {
                        d -= c;
                    }
                }
                if d.norm() > 1e-15 {
                    row.push((j as u32, d));
                }
            }
            row.sort_unstable_by_key(|e| e.0);
            norm_bound = norm_bound.max(row.iter().map(|e| e.1.norm()).sum());
            for &(j, d) in &row {
                cols.push(j);
                vals.push(d);
            }
            row_ptr.push(cols.len());
        }
        SectorOperator { dim, row_ptr, cols, vals, norm_bound }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Max absolute row sum, an upper bound on the spectral norm.
    pub fn norm_bound(&self) -> f64 {
        self.norm_bound
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k] as usize];
            }
            *yi = acc;
        }
    }

    /// <x|A|x>
    pub fn quadratic(&self, x: &[Complex64]) -> Complex64 {
        super::dot(x, &self.apply(x))
    }

    pub fn rows(&self) -> impl Iterator<Item = impl Iterator<Item = (usize, Complex64)> + '_> + '_ {
        (0..self.dim).map(move |i| (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k] as usize, self.vals[k])))
    }
}

/// exp(theta A) x by scaled Taylor series.
pub fn exp_apply(op: &SectorOperator, theta: f64, x: &[Complex64]) -> Vec<Complex64> {
    let bound = theta.abs() * op.norm_bound();
    let steps = bound.ceil().max(1.0) as usize;
    let t = theta / steps as f64;
    let mut cur = x.to_vec();
    let mut term = vec![Complex64::new(0.0, 0.0); x.len()];
    let mut next = vec![Complex64::new(0.0, 0.0); x.len()];
    for _ in 0..steps {
        term.copy_from_slice(&cur);
        let mut k = 1.0;
        loop {
            op.apply_into(&term, &mut next);
            let s = t / k;
            for (a, b) in term.iter_mut().zip(&next) {
                *a = b * s;
            }
            for (c, a) in cur.iter_mut().zip(&term) {
                *c += a;
            }
            if norm(&term) < TAYLOR_CUTOFF || k > 200.0 {
                break;
            }
            k += 1.0;
        }
    }
    cur
}
