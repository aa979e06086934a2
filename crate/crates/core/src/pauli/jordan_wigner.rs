use super::{PauliString, PauliSum};
use crate::error::{Error, Result};
use crate::fermion::{annihilate, create, FermionSum, Ladder};
use num_complex::Complex64;

/// JW image of one ladder operator:
/// a+_p = (1/2) X_p (1 + Z_p) Z_{<p},  a_p = (1/2) X_p (1 - Z_p) Z_{<p}.
fn ladder_image(l: Ladder, n_qubits: usize) -> Result<PauliSum> {
    if l.mode >= n_qubits {
        return Err(Error::QubitIndex { index: l.mode, n_qubits });
    }
    let bit = 1u64 << l.mode;
    let low = bit - 1;
    let s = if l.dagger { 0.5 } else { -0.5 };
    PauliSum::from_terms(
        n_qubits,
        [
            (PauliString::new(bit, low), Complex64::new(0.5, 0.0)),
            (PauliString::new(bit, low | bit), Complex64::new(s, 0.0)),
        ],
    )
}

pub fn jordan_wigner(op: &FermionSum, n_qubits: usize) -> Result<PauliSum> {
    let mut total = PauliSum::zero(n_qubits);
    for (ladders, coef) in op.terms() {
        let mut term = PauliSum::identity(n_qubits).scale(coef);
        for &l in ladders {
            term = term.mul(&ladder_image(l, n_qubits)?)?;
        }
        total = total.add(&term)?;
    }
    Ok(total)
}

pub fn number_operator(n_qubits: usize) -> PauliSum {
    let terms = (0..n_qubits).flat_map(|p| {
        [
            (PauliString::IDENTITY, Complex64::new(0.5, 0.0)),
            (PauliString::new(0, 1 << p), Complex64::new(-0.5, 0.0)),
        ]
    });
    PauliSum::from_terms(n_qubits, terms).expect("register-local terms")
}

/// S_z with spin orbital 2p alpha and 2p+1 beta.
pub fn sz_operator(n_qubits: usize) -> PauliSum {
    let terms = (0..n_qubits).map(|q| {
        let c = if q % 2 == 0 { -0.25 } else { 0.25 };
        (PauliString::new(0, 1 << q), Complex64::new(c, 0.0))
    });
    PauliSum::from_terms(n_qubits, terms).expect("register-local terms")
}

/// Fermionic S^2 = S_- S_+ + S_z^2 + S_z.
pub fn spin_squared_fermion(n_spatial: usize) -> FermionSum {
    let mut sp = FermionSum::zero();
    let mut sz = FermionSum::zero();
    for p in 0..n_spatial {
        sp = &sp + &FermionSum::term(1.0, &[create(2 * p), annihilate(2 * p + 1)]);
        sz = &sz + &FermionSum::term(0.5, &[create(2 * p), annihilate(2 * p)]);
        sz = &sz + &FermionSum::term(-0.5, &[create(2 * p + 1), annihilate(2 * p + 1)]);
    }
    let sm = sp.adjoint();
    &(&(&sm * &sp) + &(&sz * &sz)) + &sz
}

pub fn spin_squared_operator(n_qubits: usize) -> Result<PauliSum> {
    if n_qubits % 2 != 0 {
        return Err(Error::Dimension(format!("odd register of {n_qubits} spin orbitals")));
    }
    jordan_wigner(&spin_squared_fermion(n_qubits / 2), n_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::apply_ladders;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn creation_on_qubit_zero() {
        let a0 = jordan_wigner(&FermionSum::term(1.0, &[create(0)]), 3).unwrap();
        let expected = PauliSum::from_standard(3, &[(c(0.5), "X0"), (Complex64::new(0.0, -0.5), "Y0")]).unwrap();
        assert_eq!(a0, expected);
    }

    #[test]
    fn anticommutation_survives_mapping() {
        let n = 4;
        for p in 0..n {
            for q in 0..n {
                let ap = jordan_wigner(&FermionSum::term(1.0, &[annihilate(p)]), n).unwrap();
                let aq = jordan_wigner(&FermionSum::term(1.0, &[create(q)]), n).unwrap();
                let ac = ap.mul(&aq).unwrap().add(&aq.mul(&ap).unwrap()).unwrap();
                let expected = if p == q { PauliSum::identity(n) } else { PauliSum::zero(n) };
                assert!(ac.sub(&expected).unwrap().is_zero(1e-14));
            }
        }
    }

    #[test]
    fn mode_outside_register_is_rejected() {
        let op = FermionSum::term(1.0, &[create(5)]);
        assert!(matches!(jordan_wigner(&op, 4), Err(Error::QubitIndex { index: 5, n_qubits: 4 })));
    }

    #[test]
    fn hopping_term_is_hermitian() {
        let t = &FermionSum::term(1.0, &[create(3), annihilate(0)]) + &FermionSum::term(1.0, &[create(0), annihilate(3)]);
        assert!(jordan_wigner(&t, 4).unwrap().is_hermitian(1e-15));
    }

    fn pauli_action(op: &PauliSum, b: u64) -> Vec<(u64, Complex64)> {
        let mut acc = std::collections::BTreeMap::<u64, Complex64>::new();
        for (p, coef) in op.iter() {
            let (s, r) = p.apply(b);
            *acc.entry(r).or_default() += coef * s;
        }
        acc.into_iter().filter(|(_, v)| v.norm() > 1e-13).collect()
    }

    proptest! {
        #[test]
        fn mapping_preserves_basis_action(
            modes in prop::collection::vec((0usize..5, any::<bool>()), 1..5),
            b in 0u64..32,
        ) {
            let ops: Vec<Ladder> = modes.iter().map(|&(m, d)| Ladder { mode: m, dagger: d }).collect();
            let image = jordan_wigner(&FermionSum::term(1.0, &ops), 5).unwrap();
            let got = pauli_action(&image, b);
            match apply_ladders(&ops, b) {
                None => prop_assert!(got.is_empty()),
                Some((s, r)) => {
                    prop_assert_eq!(got.len(), 1);
                    prop_assert_eq!(got[0].0, r);
                    prop_assert!((got[0].1 - c(s)).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn spin_operators_are_diagonal_counts(b in 0u64..256) {
            let n = number_operator(8);
            let sz = sz_operator(8);
            let na = (b & 0x55).count_ones() as f64;
            let nb = (b & 0xAA).count_ones() as f64;
            let nv = pauli_action(&n, b);
            let sv = pauli_action(&sz, b);
            let nval = nv.first().map(|x| x.1.re).unwrap_or(0.0);
            let sval = sv.first().map(|x| x.1.re).unwrap_or(0.0);
            prop_assert!((nval - (na + nb)).abs() < 1e-12);
            prop_assert!((sval - 0.5 * (na - nb)).abs() < 1e-12);
        }
    }

    #[test]
    fn two_electron_singlet_and_triplet() {
        let s2 = spin_squared_operator(4).unwrap();
        // |1a 1b> closed shell: S^2 = 0
        let closed = pauli_action(&s2, 0b0011);
        assert!(closed.is_empty());
        // |1a 2a>: triplet M=1, S^2 = 2
        let high = pauli_action(&s2, 0b0101);
        assert_eq!(high.len(), 1);
        assert!((high[0].1.re - 2.0).abs() < 1e-12);
    }
}
