use super::IntegralSet;
use crate::error::{Error, Result};
use crate::fermion::{annihilate, create, FermionSum, ReferenceSpace};
use crate::pauli::{PauliString, PauliSum, PRUNE};
use crate::symmetry::{product_of, IrrepLabel, PointGroup};
use num_complex::Complex64;
use std::collections::HashMap;

/// Integrals below this magnitude are dropped during assembly.
pub const INTEGRAL_DROP: f64 = 1e-12;

/// Spin-orbital Hamiltonian of an active space.
/// Spin orbital 2p is alpha and 2p+1 beta for active spatial orbital p.
#[derive(Clone, Debug)]
pub struct MolecularHamiltonian {
    pub n_spin_orbitals: usize,
    pub n_electrons: usize,
    pub constant: f64,
    one: Vec<f64>,
    two: Vec<f64>,
    pub so_irreps: Vec<IrrepLabel>,
    pub point_group: PointGroup,
    /// Original spatial indices of the active orbitals.
    pub active_orbitals: Vec<usize>,
    pub frozen_orbitals: Vec<usize>,
}

impl MolecularHamiltonian {
    /// Build directly from spin-orbital integrals; `two[p][q][r][s]` = (pq|rs).
    pub fn from_spin_orbital_integrals(
        n_electrons: usize,
        constant: f64,
        one: Vec<f64>,
        two: Vec<f64>,
        so_irreps: Vec<IrrepLabel>,
        point_group: PointGroup,
    ) -> Result<Self> {
        let n = so_irreps.len();
        if one.len() != n * n || two.len() != n * n * n * n {
            return Err(Error::Dimension(format!("integral arrays do not match {n} spin orbitals")));
        }
        if n_electrons > n {
            return Err(Error::Dimension(format!("{n_electrons} electrons in {n} spin orbitals")));
        }
        Ok(MolecularHamiltonian {
            n_spin_orbitals: n,
            n_electrons,
            constant,
            one,
            two,
            so_irreps,
            point_group,
            active_orbitals: (0..n / 2).collect(),
            frozen_orbitals: Vec::new(),
        })
    }

    #[inline]
    pub fn one(&self, p: usize, q: usize) -> f64 {
        self.one[p * self.n_spin_orbitals + q]
    }

    /// (pq|rs) over spin orbitals.
    #[inline]
    pub fn two(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        let n = self.n_spin_orbitals;
        self.two[((p * n + q) * n + r) * n + s]
    }

    /// Lowest-index closed-shell determinant.
    pub fn hf_bits(&self) -> u64 {
        (1u64 << self.n_electrons) - 1
    }

    pub fn reference_space(&self) -> ReferenceSpace {
        ReferenceSpace::from_bits(self.hf_bits(), self.n_spin_orbitals)
    }

    pub fn determinant_irrep(&self, bits: u64) -> IrrepLabel {
        product_of((0..self.n_spin_orbitals).filter(|&p| bits >> p & 1 == 1).map(|p| self.so_irreps[p]))
    }

    /// Copy with a scalar added to the constant term (H + c I).
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.constant += c;
        out
    }

    /// H = c + sum h_pq a+_p a_q + 1/2 sum (pq|rs) a+_p a+_r a_s a_q as ladder products.
    pub fn to_fermion(&self) -> FermionSum {
        let n = self.n_spin_orbitals;
        let mut h = FermionSum::identity().scale(self.constant);
        for p in 0..n {
            for q in 0..n {
                let v = self.one(p, q);
                if v != 0.0 {
                    h.add_term(v, &[create(p), annihilate(q)]);
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.two(p, q, r, s);
                        if v != 0.0 {
                            h.add_term(0.5 * v, &[create(p), create(r), annihilate(s), annihilate(q)]);
                        }
                    }
                }
            }
        }
        h
    }

    /// Jordan-Wigner image built from the antisymmetrized two-body sum
    /// over P < R, Q < S.
    pub fn to_pauli(&self) -> Result<PauliSum> {
        let n = self.n_spin_orbitals;
        let image = |mode: usize, dagger: bool| -> [(PauliString, f64); 2] {
            let bit = 1u64 << mode;
            let low = bit - 1;
            [(PauliString::new(bit, low), 0.5), (PauliString::new(bit, low | bit), if dagger { 0.5 } else { -0.5 })]
        };
        let mut acc: HashMap<PauliString, f64> = HashMap::new();
        acc.insert(PauliString::IDENTITY, self.constant);
        let mut push = |factors: &[[(PauliString, f64); 2]], coef: f64| {
            let k = factors.len();
            for mask in 0..(1usize << k) {
                let mut s = PauliString::IDENTITY;
                let mut c = coef;
                for (i, f) in factors.iter().enumerate() {
                    let (p, w) = f[mask >> i & 1];
                    let (sign, prod) = s.mul(p);
                    s = prod;
                    c *= w * sign;
                }
                *acc.entry(s).or_insert(0.0) += c;
            }
        };
        for p in 0..n {
            for q in 0..n {
                let v = self.one(p, q);
                if v != 0.0 {
                    push(&[image(p, true), image(q, false)], v);
                }
            }
        }
        for p in 0..n {
            for r in p + 1..n {
                for q in 0..n {
                    for s in q + 1..n {
                        // <PR||QS> = (PQ|RS) - (PS|RQ)
                        let v = self.two(p, q, r, s) - self.two(p, s, r, q);
                        if v != 0.0 {
                            push(&[image(p, true), image(r, true), image(s, false), image(q, false)], v);
                        }
                    }
                }
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| c.abs() >= PRUNE).map(|(p, c)| (p, Complex64::new(c, 0.0)));
        PauliSum::from_terms(n, terms)
    }
}

/// Freeze doubly occupied core orbitals into a constant and effective
/// one-body operator, keep `active` (default: all non-frozen), and expand
/// to spin orbitals.
pub fn assemble(ints: &IntegralSet, frozen: &[usize], active: Option<&[usize]>) -> Result<MolecularHamiltonian> {
    let n = ints.n_orbitals;
    if ints.n_electrons % 2 != 0 || ints.ms2 != 0 {
        return Err(Error::InvalidFreeze(format!(
            "closed-shell reference required (NELEC={}, MS2={})",
            ints.n_electrons, ints.ms2
        )));
    }
    let nocc = ints.n_electrons / 2;
    let mut seen = vec![false; n];
    for &f in frozen {
        if f >= n {
            return Err(Error::InvalidFreeze(format!("frozen orbital {f} outside 0..{n}")));
        }
        if f >= nocc {
            return Err(Error::InvalidFreeze(format!("frozen orbital {f} is not occupied in the reference")));
        }
        if seen[f] {
            return Err(Error::InvalidFreeze(format!("orbital {f} frozen twice")));
        }
        seen[f] = true;
    }
    let active: Vec<usize> = match active {
        Some(a) => {
            let mut a = a.to_vec();
            a.sort_unstable();
            a
        }
        None => (0..n).filter(|p| !seen[*p]).collect(),
    };
    for w in active.windows(2) {
        if w[0] == w[1] {
            return Err(Error::InvalidFreeze(format!("orbital {} listed twice as active", w[0])));
        }
    }
    for &a in &active {
        if a >= n {
            return Err(Error::InvalidFreeze(format!("active orbital {a} outside 0..{n}")));
        }
        if seen[a] {
            return Err(Error::InvalidFreeze(format!("orbital {a} is both frozen and active")));
        }
    }
    let active_occ = active.iter().filter(|&&a| a < nocc).count();
    if active_occ + frozen.len() != nocc {
        return Err(Error::InvalidFreeze("an occupied orbital is neither frozen nor active".into()));
    }
    if active.is_empty() {
        return Err(Error::InvalidFreeze("empty active space".into()));
    }

    let eri = &ints.eri;
    let mut constant = ints.e_nuclear;
    for &i in frozen {
        constant += 2.0 * ints.h[(i, i)];
        for &j in frozen {
            constant += 2.0 * eri.get(i, i, j, j) - eri.get(i, j, j, i);
        }
    }
    let na = active.len();
    let nso = 2 * na;
    let mut one = vec![0.0; nso * nso];
    let mut two = vec![0.0; nso * nso * nso * nso];
    let drop = |v: f64| if v.abs() < INTEGRAL_DROP { 0.0 } else { v };
    for (p, &op) in active.iter().enumerate() {
        for (q, &oq) in active.iter().enumerate() {
            let mut v = ints.h[(op, oq)];
            for &j in frozen {
                v += 2.0 * eri.get(op, oq, j, j) - eri.get(op, j, j, oq);
            }
            let v = drop(v);
            for s in 0..2 {
                one[(2 * p + s) * nso + 2 * q + s] = v;
            }
        }
    }
    for (p, &op) in active.iter().enumerate() {
        for (q, &oq) in active.iter().enumerate() {
            for (r, &or) in active.iter().enumerate() {
                for (s, &os) in active.iter().enumerate() {
                    let v = drop(eri.get(op, oq, or, os));
                    if v == 0.0 {
                        continue;
                    }
                    for s1 in 0..2 {
                        for s2 in 0..2 {
                            let (a, b, c, d) = (2 * p + s1, 2 * q + s1, 2 * r + s2, 2 * s + s2);
                            two[((a * nso + b) * nso + c) * nso + d] = v;
                        }
                    }
                }
            }
        }
    }
    let so_irreps = active.iter().flat_map(|&a| [ints.orbital_irreps[a]; 2]).collect();
    Ok(MolecularHamiltonian {
        n_spin_orbitals: nso,
        n_electrons: ints.n_electrons - 2 * frozen.len(),
        constant,
        one,
        two,
        so_irreps,
        point_group: ints.point_group,
        active_orbitals: active,
        frozen_orbitals: frozen.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_s_integrals, h8_basis, parse_layout, OrbitalChoice, H8_LAYOUT};
    use crate::pauli::jordan_wigner;

    fn h4_ints() -> IntegralSet {
        let layout = parse_layout(H8_LAYOUT).unwrap();
        let mut basis = h8_basis(0.5, &layout).unwrap();
        basis.atoms.truncate(4);
        build_s_integrals(&basis, &OrbitalChoice::Rhf).unwrap()
    }

    #[test]
    fn direct_and_ladder_routes_agree() {
        let mh = assemble(&h4_ints(), &[], None).unwrap();
        let direct = mh.to_pauli().unwrap();
        let via_ladders = jordan_wigner(&mh.to_fermion(), mh.n_spin_orbitals).unwrap();
        assert!(direct.sub(&via_ladders).unwrap().is_zero(1e-12));
        assert!(direct.is_hermitian(1e-14));
    }

    #[test]
    fn frozen_core_preserves_reference_energy() {
        let ints = h4_ints();
        let full = assemble(&ints, &[], None).unwrap();
        let frz = assemble(&ints, &[0], None).unwrap();
        assert_eq!(frz.n_electrons, 2);
        assert_eq!(frz.n_spin_orbitals, 6);
        let diag = |m: &MolecularHamiltonian| {
            let occ: Vec<usize> = (0..m.n_electrons).collect();
            let mut e = m.constant;
            for &p in &occ {
                e += m.one(p, p);
                for &q in &occ {
                    e += 0.5 * (m.two(p, p, q, q) - m.two(p, q, q, p));
                }
            }
            e
        };
        assert!((diag(&full) - ints.closed_shell_energy()).abs() < 1e-12);
        assert!((diag(&frz) - ints.closed_shell_energy()).abs() < 1e-12);
    }

    #[test]
    fn invalid_selections() {
        let ints = h4_ints();
        assert!(matches!(assemble(&ints, &[3], None), Err(Error::InvalidFreeze(_))));
        assert!(matches!(assemble(&ints, &[0], Some(&[0, 1, 2])), Err(Error::InvalidFreeze(_))));
        assert!(matches!(assemble(&ints, &[], Some(&[0, 2, 3])), Err(Error::InvalidFreeze(_))));
        assert!(assemble(&ints, &[], Some(&[0, 1, 2])).is_ok());
    }
}
