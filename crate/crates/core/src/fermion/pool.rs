use super::excitation::{enumerate_excitations, ReferenceSpace};
use super::ladder::{annihilate, create, FermionSum, Ladder};
use crate::symmetry::{product_of, IrrepLabel};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PoolKind {
    #[default]
    SpinAdapted,
    SpinOrbital,
}

impl std::str::FromStr for PoolKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spin-adapted" | "spin_adapted" => Ok(PoolKind::SpinAdapted),
            "spin-orbital" | "spin_orbital" => Ok(PoolKind::SpinOrbital),
            other => Err(format!("unknown pool '{other}'")),
        }
    }
}

/// Excitation operator T of a pool element; the generator is T - T+.
#[derive(Clone, Debug)]
pub struct PoolOperator {
    pub label: String,
    pub excitation: FermionSum,
    pub irrep: IrrepLabel,
}

impl PoolOperator {
    pub fn generator(&self) -> FermionSum {
        &self.excitation - &self.excitation.adjoint()
    }
}

fn alpha(p: usize) -> usize {
    2 * p
}

fn beta(p: usize) -> usize {
    2 * p + 1
}

fn prod(c: f64, ops: &[Ladder]) -> FermionSum {
    FermionSum::term(c, ops)
}

/// Singlet-coupled singles and doubles over spatial occupied indices
/// `0..n_occ` and virtual indices `n_occ..n_occ + n_virt`.
pub fn spin_adapted_pool(n_occ: usize, n_virt: usize, so_irreps: &[IrrepLabel]) -> Vec<PoolOperator> {
    let irrep = |ps: &[usize]| product_of(ps.iter().map(|&p| so_irreps[alpha(p)]));
    let virt_range = n_occ..n_occ + n_virt;
    let mut pool = Vec::new();
    for i in 0..n_occ {
        for a in virt_range.clone() {
            let t = &prod(1.0, &[create(alpha(a)), annihilate(alpha(i))])
                + &prod(1.0, &[create(beta(a)), annihilate(beta(i))]);
            pool.push(PoolOperator { label: format!("T1({i}->{a})"), excitation: t, irrep: irrep(&[i, a]) });
        }
    }
    for i in 0..n_occ {
        for j in i..n_occ {
            for a in virt_range.clone() {
                for b in a..n_occ + n_virt {
                    // (a+_{a b} a+_{b a} + a+_{b b} a+_{a a})(a_{j a} a_{i b} + a_{i a} a_{j b})
                    let cre = [[create(beta(a)), create(alpha(b))], [create(beta(b)), create(alpha(a))]];
                    let ann = [[annihilate(alpha(j)), annihilate(beta(i))], [annihilate(alpha(i)), annihilate(beta(j))]];
                    let mut t = FermionSum::zero();
                    for c in &cre {
                        for n in &ann {
                            t = &t + &prod(1.0, &[c[0], c[1], n[0], n[1]]);
                        }
                    }
                    pool.push(PoolOperator {
                        label: format!("T2s({i},{j}->{a},{b})"),
                        excitation: t,
                        irrep: irrep(&[i, j, a, b]),
                    });
                }
            }
        }
    }
    for i in 0..n_occ {
        for j in i + 1..n_occ {
            for a in virt_range.clone() {
                for b in a + 1..n_occ + n_virt {
                    let mut t = &prod(1.0, &[create(alpha(a)), create(alpha(b)), annihilate(alpha(j)), annihilate(alpha(i))])
                        + &prod(1.0, &[create(beta(a)), create(beta(b)), annihilate(beta(j)), annihilate(beta(i))]);
                    let cre = [([create(beta(a)), create(alpha(b))], 1.0), ([create(beta(b)), create(alpha(a))], -1.0)];
                    let ann = [([annihilate(alpha(j)), annihilate(beta(i))], 1.0), ([annihilate(alpha(i)), annihilate(beta(j))], -1.0)];
                    for (c, sc) in &cre {
                        for (n, sn) in &ann {
                            t = &t + &prod(0.5 * sc * sn, &[c[0], c[1], n[0], n[1]]);
                        }
                    }
                    pool.push(PoolOperator {
                        label: format!("T2t({i},{j}->{a},{b})"),
                        excitation: t,
                        irrep: irrep(&[i, j, a, b]),
                    });
                }
            }
        }
    }
    pool
}

/// Every S_z-conserving single and double spin-orbital excitation.
pub fn spin_orbital_pool(reference: &ReferenceSpace, so_irreps: &[IrrepLabel]) -> Vec<PoolOperator> {
    (1..=2)
        .flat_map(|k| enumerate_excitations(k, reference, so_irreps, true, None))
        .map(|e| PoolOperator { label: e.label(), excitation: e.operator(), irrep: e.irrep })
        .collect()
}
