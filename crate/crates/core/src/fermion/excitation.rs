use super::ladder::{annihilate, apply_ladders, create, FermionSum, Ladder};
use crate::symmetry::{product_of, IrrepLabel};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Occupied and virtual spin orbitals of a reference determinant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceSpace {
    pub n_spin_orbitals: usize,
    pub occupied: Vec<usize>,
    pub virtuals: Vec<usize>,
}

impl ReferenceSpace {
    pub fn from_bits(bits: u64, n_spin_orbitals: usize) -> Self {
        let (occupied, virtuals) = (0..n_spin_orbitals).partition(|&p| bits >> p & 1 == 1);
        ReferenceSpace { n_spin_orbitals, occupied, virtuals }
    }

    pub fn bits(&self) -> u64 {
        self.occupied.iter().fold(0, |b, &p| b | 1 << p)
    }
}

/// r_I = a+_{c_k} ... a+_{c_1} a_{o_1} ... a_{o_k} with both index lists ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Excitation {
    pub annihilations: Vec<usize>,
    pub creations: Vec<usize>,
    pub irrep: IrrepLabel,
}

impl Excitation {
    pub fn new(annihilations: Vec<usize>, creations: Vec<usize>, so_irreps: &[IrrepLabel]) -> Self {
        let irrep = excitation_irrep(&annihilations, &creations, so_irreps);
        Excitation { annihilations, creations, irrep }
    }

    pub fn rank(&self) -> usize {
        self.creations.len()
    }

    /// Ladder string in normal order.
    pub fn ladders(&self) -> Vec<Ladder> {
        let mut ops: Vec<Ladder> = self.creations.iter().rev().map(|&c| create(c)).collect();
        ops.extend(self.annihilations.iter().map(|&o| annihilate(o)));
        ops
    }

    pub fn operator(&self) -> FermionSum {
        FermionSum::term(1.0, &self.ladders())
    }

    /// Twice the change in S_z; spin orbital 2p is alpha, 2p+1 beta.
    pub fn sz2_change(&self) -> i32 {
        let spin = |p: &usize| if p % 2 == 0 { 1 } else { -1 };
        self.creations.iter().map(spin).sum::<i32>() - self.annihilations.iter().map(spin).sum::<i32>()
    }

    /// Sign and determinant of r_I acting on `bits`.
    pub fn apply(&self, bits: u64) -> Option<(f64, u64)> {
        apply_ladders(&self.ladders(), bits)
    }

    /// Deterministic text form, e.g. `3: (0,3,5)->(8,11,12)`.
    pub fn label(&self) -> String {
        let join = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        format!("{}: ({})->({})", self.rank(), join(&self.annihilations), join(&self.creations))
    }
}

impl fmt::Display for Excitation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

pub fn excitation_irrep(annihilations: &[usize], creations: &[usize], so_irreps: &[IrrepLabel]) -> IrrepLabel {
    product_of(annihilations.iter().chain(creations).map(|&p| so_irreps[p]))
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All rank-k excitations from `reference`, in lexicographic order of
/// (annihilations, creations). `sz_conserving` drops spin-changing ones;
/// `target` keeps only operators of that irrep.
pub fn enumerate_excitations(
    rank: usize,
    reference: &ReferenceSpace,
    so_irreps: &[IrrepLabel],
    sz_conserving: bool,
    target: Option<IrrepLabel>,
) -> Vec<Excitation> {
    let occ = combinations(&reference.occupied, rank);
    let virt = combinations(&reference.virtuals, rank);
    let alpha = |v: &[usize]| v.iter().filter(|p| *p % 2 == 0).count();
    let mut out = Vec::new();
    for o in &occ {
        let oa = alpha(o);
        for v in &virt {
            if sz_conserving && alpha(v) != oa {
                continue;
            }
            let e = Excitation::new(o.clone(), v.clone(), so_irreps);
            if target.map_or(true, |t| e.irrep == t) {
                out.push(e);
            }
        }
    }
    out
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Closed-form number of S_z-conserving rank-k excitations.
pub fn count_excitations(rank: usize, occ_alpha: usize, occ_beta: usize, virt_alpha: usize, virt_beta: usize) -> u64 {
    (0..=rank)
        .map(|ka| {
            let kb = rank - ka;
            binomial(occ_alpha, ka) * binomial(virt_alpha, ka) * binomial(occ_beta, kb) * binomial(virt_beta, kb)
        })
        .sum()
}
