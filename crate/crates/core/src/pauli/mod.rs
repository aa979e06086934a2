//! Pauli strings in X/Z bitmask form and their linear combinations.
//!
//! A string (x, z) denotes X^x Z^z: on each qubit the Z factor acts first.
//! A qubit with both bits set carries XZ = -iY.

mod jordan_wigner;

pub use jordan_wigner::{jordan_wigner, number_operator, spin_squared_operator, sz_operator};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

pub const PRUNE: f64 = 1e-14;
pub const MAX_QUBITS: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn new(x: u64, z: u64) -> Self {
        PauliString { x, z }
    }

    /// Product with phase: X^x1 Z^z1 X^x2 Z^z2 = (-1)^{|z1 & x2|} X^{x1^x2} Z^{z1^z2}.
    pub fn mul(self, other: PauliString) -> (f64, PauliString) {
        let sign = if (self.z & other.x).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (sign, PauliString { x: self.x ^ other.x, z: self.z ^ other.z })
    }

    /// (X^x Z^z)+ = Z^z X^x = (-1)^{|x & z|} X^x Z^z.
    pub fn adjoint_sign(self) -> f64 {
        if (self.x & self.z).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Action on a computational basis state: X^x Z^z |b> = (-1)^{|b & z|} |b ^ x>.
    pub fn apply(self, b: u64) -> (f64, u64) {
        let sign = if (b & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        (sign, b ^ self.x)
    }

    pub fn commutes_with(self, other: PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    pub fn support(self) -> u64 {
        self.x | self.z
    }

    /// Sparse label in standard Pauli letters with the phase that relates it
    /// to this string: X^x Z^z = phase * label.
    pub fn standard_label(self) -> (Complex64, String) {
        let ny = (self.x & self.z).count_ones();
        let phase = Complex64::new(0.0, -1.0).powu(ny);
        let mut parts = Vec::new();
        let mut s = self.support();
        while s != 0 {
            let q = s.trailing_zeros();
            let bit = 1u64 << q;
            let letter = match (self.x & bit != 0, self.z & bit != 0) {
                (true, false) => 'X',
                (true, true) => 'Y',
                _ => 'Z',
            };
            parts.push(format!("{letter}{q}"));
            s &= s - 1;
        }
        let label = if parts.is_empty() { "I".to_string() } else { parts.join(" ") };
        (phase, label)
    }

    /// Parse a sparse label such as `X0 Y3 Z4` into a string and its phase
    /// relative to the X/Z form: label = phase * X^x Z^z.
    pub fn parse_standard(label: &str) -> Result<(Complex64, PauliString)> {
        let mut s = PauliString::IDENTITY;
        let mut ny = 0u32;
        for tok in label.split_whitespace() {
            if tok == "I" {
                continue;
            }
            let (letter, q) = tok.split_at(1);
            let q: u32 = q.parse().map_err(|_| Error::Parameter(format!("bad Pauli token '{tok}'")))?;
            if q >= 64 {
                return Err(Error::QubitIndex { index: q as usize, n_qubits: 64 });
            }
            let bit = 1u64 << q;
            if s.support() & bit != 0 {
                return Err(Error::Parameter(format!("qubit {q} repeated in '{label}'")));
            }
            match letter {
                "X" => s.x |= bit,
                "Z" => s.z |= bit,
                "Y" => {
                    s.x |= bit;
                    s.z |= bit;
                    ny += 1;
                }
                _ => return Err(Error::Parameter(format!("bad Pauli token '{tok}'"))),
            }
        }
        // Y = i XZ
        Ok((Complex64::new(0.0, 1.0).powu(ny), s))
    }
}

/// Sum of Pauli strings on a fixed register with canonical term order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum { n_qubits, terms: BTreeMap::new() }
    }

    pub fn identity(n_qubits: usize) -> Self {
        let mut s = Self::zero(n_qubits);
        s.terms.insert(PauliString::IDENTITY, Complex64::new(1.0, 0.0));
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (PauliString, Complex64)>>(n_qubits: usize, terms: I) -> Result<Self> {
        let mut acc: HashMap<PauliString, Complex64> = HashMap::new();
        for (p, c) in terms {
            check_register(p, n_qubits)?;
            *acc.entry(p).or_default() += c;
        }
        Ok(Self::from_map(n_qubits, acc))
    }

    /// Build from sparse standard labels, e.g. `[(0.5, "X0 Y1")]`.
    pub fn from_standard(n_qubits: usize, terms: &[(Complex64, &str)]) -> Result<Self> {
        let mut parsed = Vec::with_capacity(terms.len());
        for (c, label) in terms {
            let (phase, p) = PauliString::parse_standard(label)?;
            parsed.push((p, c * phase));
        }
        Self::from_terms(n_qubits, parsed)
    }

    fn from_map(n_qubits: usize, acc: HashMap<PauliString, Complex64>) -> Self {
        let terms = acc.into_iter().filter(|(_, c)| c.norm() >= PRUNE).collect();
        PauliSum { n_qubits, terms }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PauliString, Complex64)> + '_ {
        self.terms.iter().map(|(p, c)| (*p, *c))
    }

    pub fn coefficient(&self, p: PauliString) -> Complex64 {
        self.terms.get(&p).copied().unwrap_or_default()
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> Self {
        let s = s.into();
        let acc = self.terms.iter().map(|(p, c)| (*p, c * s)).collect();
        Self::from_map(self.n_qubits, acc)
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        self.same_register(other)?;
        let mut acc: HashMap<PauliString, Complex64> = self.terms.iter().map(|(p, c)| (*p, *c)).collect();
        for (p, c) in &other.terms {
            *acc.entry(*p).or_default() += c;
        }
        Ok(Self::from_map(self.n_qubits, acc))
    }

    pub fn sub(&self, other: &PauliSum) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &PauliSum) -> Result<Self> {
        self.same_register(other)?;
        let mut acc: HashMap<PauliString, Complex64> = HashMap::with_capacity(self.len() * other.len());
        for (p, cp) in &self.terms {
            for (q, cq) in &other.terms {
                let (sign, r) = p.mul(*q);
                *acc.entry(r).or_default() += cp * cq * sign;
            }
        }
        Ok(Self::from_map(self.n_qubits, acc))
    }

    pub fn commutator(&self, other: &PauliSum) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn adjoint(&self) -> Self {
        let acc = self.terms.iter().map(|(p, c)| (*p, c.conj() * p.adjoint_sign())).collect();
        Self::from_map(self.n_qubits, acc)
    }

    /// Largest coefficient deviation from O+ = O.
    pub fn hermiticity_defect(&self) -> f64 {
        self.defect(1.0)
    }

    /// Largest coefficient deviation from O+ = -O.
    pub fn anti_hermiticity_defect(&self) -> f64 {
        self.defect(-1.0)
    }

    fn defect(&self, sign: f64) -> f64 {
        self.terms
            .iter()
            .map(|(p, c)| (c.conj() * p.adjoint_sign() - c * sign).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.anti_hermiticity_defect() <= tol
    }

    /// Sum of coefficient magnitudes, an upper bound on the operator norm.
    pub fn norm1(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs_coefficient() < tol
    }

    fn same_register(&self, other: &PauliSum) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Dimension(format!(
                "operator registers of {} and {} qubits",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(())
    }

    /// Terms keyed by X mask, each with its (z, coefficient) list.
    pub fn grouped_by_flip(&self) -> Vec<(u64, Vec<(u64, Complex64)>)> {
        let mut groups: BTreeMap<u64, Vec<(u64, Complex64)>> = BTreeMap::new();
        for (p, c) in &self.terms {
            groups.entry(p.x).or_default().push((p.z, *c));
        }
        groups.into_iter().collect()
    }
}

fn check_register(p: PauliString, n_qubits: usize) -> Result<()> {
    let support = p.support();
    if n_qubits < 64 && support >> n_qubits != 0 {
        let index = 63 - support.leading_zeros() as usize;
        return Err(Error::QubitIndex { index, n_qubits });
    }
    Ok(())
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (p, c)) in self.terms.iter().enumerate() {
            let (phase, label) = p.standard_label();
            let c = c * phase;
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "({:+.12}{:+.12}i) {label}", c.re, c.im)?;
        }
        Ok(())
    }
}
