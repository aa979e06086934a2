//! Exact diagonalization in a determinant sector by Slater-Condon rules.
//! Independent of the qubit mapping; serves as the reference oracle.

use crate::error::{Error, Result};
use crate::fermion::{annihilate, apply_ladders, create};
use crate::hamiltonian::MolecularHamiltonian;
use crate::linalg::{lanczos_lowest, symmetric_eigen};
use crate::symmetry::IrrepLabel;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

pub const DENSE_LIMIT: usize = 5000;
pub const DIMENSION_GUARD: usize = 200_000;

fn bits_of(mut b: u64) -> Vec<usize> {
    let mut v = Vec::with_capacity(b.count_ones() as usize);
    while b != 0 {
        v.push(b.trailing_zeros() as usize);
        b &= b - 1;
    }
    v
}

fn spread(combo: u64, offset: usize) -> u64 {
    bits_of(combo).into_iter().fold(0, |acc, p| acc | 1 << (2 * p + offset))
}

/// Determinants with the given spin populations, optionally of one irrep.
pub fn sector_determinants(
    n_spin_orbitals: usize,
    n_alpha: usize,
    n_beta: usize,
    irrep: Option<(IrrepLabel, &[IrrepLabel])>,
) -> Vec<u64> {
    let m = n_spin_orbitals / 2;
    let pick = |k: usize| -> Vec<u64> { (0u64..1 << m).filter(|c| c.count_ones() as usize == k).collect() };
    let (alphas, betas) = (pick(n_alpha), pick(n_beta));
    let mut dets = Vec::with_capacity(alphas.len() * betas.len());
    for a in &alphas {
        for b in &betas {
            let d = spread(*a, 0) | spread(*b, 1);
            if let Some((target, so)) = irrep {
                let g = bits_of(d).into_iter().fold(IrrepLabel::SYMMETRIC, |acc, p| acc ^ so[p]);
                if g != target {
                    continue;
                }
            }
            dets.push(d);
        }
    }
    dets.sort_unstable();
    dets
}

/// <D_bra|H|D_ket> including the scalar constant on the diagonal.
pub fn slater_condon(mh: &MolecularHamiltonian, bra: u64, ket: u64) -> f64 {
    let diff = bra ^ ket;
    match diff.count_ones() {
        0 => {
            let occ = bits_of(ket);
            let mut e = mh.constant;
            for &p in &occ {
                e += mh.one(p, p);
                for &q in &occ {
                    e += 0.5 * (mh.two(p, p, q, q) - mh.two(p, q, q, p));
                }
            }
            e
        }
        2 => {
            let p = (ket & diff).trailing_zeros() as usize;
            let r = (bra & diff).trailing_zeros() as usize;
            let Some((sign, _)) = apply_ladders(&[create(r), annihilate(p)], ket) else { return 0.0 };
            let mut v = mh.one(r, p);
            for k in bits_of(ket) {
                if k != p {
                    v += mh.two(r, p, k, k) - mh.two(r, k, k, p);
                }
            }
            sign * v
        }
        4 => {
            let ann = bits_of(ket & diff);
            let cre = bits_of(bra & diff);
            if ann.len() != 2 || cre.len() != 2 {
                return 0.0;
            }
            let (p, q, r, s) = (ann[0], ann[1], cre[0], cre[1]);
            let Some((sign, _)) = apply_ladders(&[create(r), create(s), annihilate(q), annihilate(p)], ket) else {
                return 0.0;
            };
            sign * (mh.two(r, p, s, q) - mh.two(r, q, s, p))
        }
        _ => 0.0,
    }
}

/// Nonzero off-diagonal connections of `ket` inside the determinant list.
fn connections(mh: &MolecularHamiltonian, ket: u64, index: &HashMap<u64, usize>) -> Vec<(usize, f64)> {
    let n = mh.n_spin_orbitals;
    let occ = bits_of(ket);
    let virt: Vec<usize> = (0..n).filter(|p| ket >> p & 1 == 0).collect();
    let mut out = Vec::new();
    let mut push = |bra: u64| {
        if let Some(&i) = index.get(&bra) {
            let v = slater_condon(mh, bra, ket);
            if v != 0.0 {
                out.push((i, v));
            }
        }
    };
    for &p in &occ {
        for &r in &virt {
            if p % 2 == r % 2 {
                push(ket ^ (1 << p) ^ (1 << r));
            }
        }
    }
    for (a, &p) in occ.iter().enumerate() {
        for &q in &occ[a + 1..] {
            for (b, &r) in virt.iter().enumerate() {
                for &s in &virt[b + 1..] {
                    if (p % 2 + q % 2) == (r % 2 + s % 2) {
                        push(ket ^ (1 << p) ^ (1 << q) ^ (1 << r) ^ (1 << s));
                    }
                }
            }
        }
    }
    out
}

pub fn hamiltonian_matrix(mh: &MolecularHamiltonian, dets: &[u64]) -> DMatrix<f64> {
    let index: HashMap<u64, usize> = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
    let n = dets.len();
    let mut h = DMatrix::zeros(n, n);
    for (j, &ket) in dets.iter().enumerate() {
        h[(j, j)] = slater_condon(mh, ket, ket);
        for (i, v) in connections(mh, ket, &index) {
            h[(i, j)] = v;
        }
    }
    h
}

/// <S^2> of a real determinant expansion, via S^2 = S_- S_+ + S_z (S_z + 1).
pub fn spin_squared(dets: &[u64], coeffs: &[f64]) -> f64 {
    let mut raised: HashMap<u64, f64> = HashMap::new();
    let mut norm2 = 0.0;
    let mut sz = 0.0;
    for (&d, &c) in dets.iter().zip(coeffs) {
        norm2 += c * c;
        let na = (d & 0x5555_5555_5555_5555).count_ones() as f64;
        let nb = (d & 0xAAAA_AAAA_AAAA_AAAA).count_ones() as f64;
        sz += c * c * 0.5 * (na - nb);
        let n_spatial = (64 - d.leading_zeros() as usize + 1) / 2;
        for p in 0..n_spatial {
            if let Some((s, r)) = apply_ladders(&[create(2 * p), annihilate(2 * p + 1)], d) {
                *raised.entry(r).or_insert(0.0) += s * c;
            }
        }
    }
    if norm2 == 0.0 {
        return 0.0;
    }
    let sz = sz / norm2;
    raised.values().map(|v| v * v).sum::<f64>() / norm2 + sz * (sz + 1.0)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FciRoot {
    pub energy: f64,
    pub spin_squared: f64,
}

#[derive(Clone, Debug)]
pub struct FciResult {
    pub dimension: usize,
    pub roots: Vec<FciRoot>,
    pub vectors: DMatrix<f64>,
    pub determinants: Vec<u64>,
}

impl FciResult {
    /// Roots whose <S^2> is within `tol` of S(S+1) for total spin `s`.
    pub fn roots_with_spin(&self, s: f64, tol: f64) -> Vec<&FciRoot> {
        self.roots.iter().filter(|r| (r.spin_squared - s * (s + 1.0)).abs() < tol).collect()
    }
}

/// Lowest `n_roots` eigenpairs in the (n_alpha, n_beta[, irrep]) sector.
pub fn fci_roots(
    mh: &MolecularHamiltonian,
    n_alpha: usize,
    n_beta: usize,
    irrep: Option<IrrepLabel>,
    n_roots: usize,
) -> Result<FciResult> {
    let filter = irrep.map(|g| (g, mh.so_irreps.as_slice()));
    let dets = sector_determinants(mh.n_spin_orbitals, n_alpha, n_beta, filter);
    let dim = dets.len();
    if dim > DIMENSION_GUARD {
        return Err(Error::DimensionGuard { dim, max: DIMENSION_GUARD });
    }
    if dim == 0 {
        return Err(Error::Dimension("empty determinant sector".into()));
    }
    let eig = if dim <= DENSE_LIMIT {
        symmetric_eigen(&hamiltonian_matrix(mh, &dets), 1e-10)?
    } else {
        let index: HashMap<u64, usize> = dets.iter().enumerate().map(|(i, &d)| (d, i)).collect();
        let cols: Vec<(f64, Vec<(usize, f64)>)> =
            dets.iter().map(|&d| (slater_condon(mh, d, d), connections(mh, d, &index))).collect();
        let apply = |x: &[f64]| -> Vec<f64> {
            let mut y = vec![0.0; x.len()];
            for (j, (diag, col)) in cols.iter().enumerate() {
                y[j] += diag * x[j];
                for &(i, v) in col {
                    y[i] += v * x[j];
                }
            }
            y
        };
        let start: Vec<f64> = (0..dim).map(|i| 1.0 + 0.05 * ((i as f64) * 0.618).sin()).collect();
        lanczos_lowest(apply, &start, n_roots, 1e-9, 20_000)?
    };
    let take = n_roots.min(eig.values.len());
    let roots = (0..take)
        .map(|k| {
            let c: Vec<f64> = eig.vectors.column(k).iter().copied().collect();
            FciRoot { energy: eig.values[k], spin_squared: spin_squared(&dets, &c) }
        })
        .collect();
    Ok(FciResult { dimension: dim, roots, vectors: eig.vectors.columns(0, take).into_owned(), determinants: dets })
}
