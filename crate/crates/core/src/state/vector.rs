use super::{dot, norm, TAYLOR_CUTOFF};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use num_complex::Complex64;
use std::io::Write;
use std::path::Path;

pub const MAX_QUBITS: usize = 26;

const HERMITIAN_TOL: f64 = 1e-12;
const IMAG_TOL: f64 = 1e-10;

/// Dense little-endian register: bit q of the index is qubit q.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, bits: u64) -> Result<Self> {
        check_ceiling(n_qubits)?;
        if bits >> n_qubits != 0 {
            return Err(Error::QubitIndex { index: 63 - bits.leading_zeros() as usize, n_qubits });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[bits as usize] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_ceiling(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::Dimension(format!("{} amplitudes for {n_qubits} qubits", amps.len())));
        }
        Ok(Statevector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, bits: u64) -> Complex64 {
        self.amps[bits as usize]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// <self|other>
    pub fn inner(&self, other: &Statevector) -> Result<Complex64> {
        self.same_register(other)?;
        Ok(dot(&self.amps, &other.amps))
    }

    pub fn scale(&mut self, s: Complex64) {
        for a in &mut self.amps {
            *a *= s;
        }
    }

    pub fn axpy(&mut self, s: Complex64, x: &Statevector) -> Result<()> {
        self.same_register(x)?;
        for (a, b) in self.amps.iter_mut().zip(&x.amps) {
            *a += s * b;
        }
        Ok(())
    }

    fn same_register(&self, other: &Statevector) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!("registers of {} and {} qubits", self.n_qubits, other.n_qubits)));
        }
        Ok(())
    }

    /// Little-endian (re, im) f64 pairs.
    pub fn dump_binary(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        for a in &self.amps {
            f.write_all(&a.re.to_le_bytes())?;
            f.write_all(&a.im.to_le_bytes())?;
        }
        f.flush()?;
        Ok(())
    }
}

fn check_ceiling(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(Error::QubitCeiling { n_qubits, max: MAX_QUBITS });
    }
    Ok(())
}

fn check_register(op: &PauliSum, psi: &Statevector) -> Result<()> {
    if op.n_qubits() != psi.n_qubits {
        return Err(Error::Dimension(format!(
            "{}-qubit operator on a {}-qubit state",
            op.n_qubits(),
            psi.n_qubits
        )));
    }
    Ok(())
}

/// Occupied spin orbitals become |1>; all JW signs are +1 for this ordering.
pub fn prepare_determinant(occupied: &[usize], n_qubits: usize) -> Result<Statevector> {
    let mut bits = 0u64;
    for &p in occupied {
        if p >= n_qubits {
            return Err(Error::QubitIndex { index: p, n_qubits });
        }
        bits |= 1 << p;
    }
    Statevector::basis_state(n_qubits, bits)
}

pub fn apply_pauli_sum(op: &PauliSum, psi: &Statevector) -> Result<Statevector> {
    check_register(op, psi)?;
    let groups = op.grouped_by_flip();
    let mut out = vec![Complex64::new(0.0, 0.0); psi.amps.len()];
    for (b, &amp) in psi.amps.iter().enumerate() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let b = b as u64;
        for (x, zs) in &groups {
            let mut d = Complex64::new(0.0, 0.0);
            for &(z, c) in zs {
                if (b & z).count_ones() % 2 == 0 {
                    d += c;
                } else {
                    d -= c;
                }
            }
            out[(b ^ x) as usize] += d * amp;
        }
    }
    Ok(Statevector { n_qubits: psi.n_qubits, amps: out })
}

/// exp(theta * tau) psi for anti-Hermitian tau, by scaled Taylor series.
pub fn apply_exp_generator(tau: &PauliSum, theta: f64, psi: &Statevector) -> Result<Statevector> {
    check_register(tau, psi)?;
    let defect = tau.anti_hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::Contract(format!("generator is not anti-Hermitian (defect {defect:e})")));
    }
    let bound = theta.abs() * tau.norm1();
    let steps = bound.ceil().max(1.0) as usize;
    let t = theta / steps as f64;
    let mut cur = psi.clone();
    for _ in 0..steps {
        let mut term = cur.clone();
        let mut k = 1.0;
        loop {
            term = apply_pauli_sum(tau, &term)?;
            term.scale(Complex64::new(t / k, 0.0));
            cur.axpy(Complex64::new(1.0, 0.0), &term)?;
            if term.norm() < TAYLOR_CUTOFF {
                break;
            }
            k += 1.0;
        }
    }
    Ok(cur)
}

/// Re <psi|op|psi> / <psi|psi> for Hermitian op.
pub fn expectation(op: &PauliSum, psi: &Statevector) -> Result<f64> {
    let defect = op.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::Contract(format!("observable is not Hermitian (defect {defect:e})")));
    }
    let n2 = psi.norm().powi(2);
    if n2 == 0.0 {
        return Err(Error::Contract("expectation in the zero vector".into()));
    }
    let v = psi.inner(&apply_pauli_sum(op, psi)?)? / n2;
    if v.im.abs() > IMAG_TOL {
        return Err(Error::Contract(format!("expectation has imaginary residue {:e}", v.im)));
    }
    Ok(v.re)
}

/// <bra|op|ket>
pub fn transition_element(bra: &Statevector, op: &PauliSum, ket: &Statevector) -> Result<Complex64> {
    bra.inner(&apply_pauli_sum(op, ket)?)
}
