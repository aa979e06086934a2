//! Molecular integrals: FCIDUMP I/O, an s-Gaussian integral engine with RHF,
//! active-space assembly and the qubit Hamiltonian.

mod active;
mod fcidump;
mod gaussian;
mod scf;
mod systems;

pub use active::{assemble, MolecularHamiltonian, INTEGRAL_DROP};
pub use fcidump::{emit_fcidump, parse_fcidump};
pub use gaussian::{boys_f0, build_s_integrals, Atom, BasisSet, Contraction, OrbitalChoice};
pub use scf::{run_rhf, RhfResult};
pub use systems::{h2_basis, h8_basis, parse_layout, Layout, H8_LAYOUT};

use crate::symmetry::{IrrepLabel, PointGroup};
use nalgebra::DMatrix;

/// Two-electron integrals (pq|rs) in chemists' notation with 8-fold symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct Eri {
    n: usize,
    data: Vec<f64>,
}

impl Eri {
    pub fn zeros(n: usize) -> Self {
        Eri { n, data: vec![0.0; n * n * n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.idx(p, q, r, s)]
    }

    /// Set (pq|rs) and all permutationally equivalent entries.
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let i = self.idx(a, b, c, d);
            self.data[i] = v;
        }
    }

    pub(crate) fn raw_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn max_abs_diff(&self, other: &Eri) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Spatial-orbital integrals of a closed-shell molecule.
#[derive(Clone, Debug)]
pub struct IntegralSet {
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub ms2: i32,
    pub e_nuclear: f64,
    pub h: DMatrix<f64>,
    pub eri: Eri,
    pub orbital_irreps: Vec<IrrepLabel>,
    pub point_group: PointGroup,
}

impl IntegralSet {
    /// Irrep of the closed-shell reference.
    pub fn reference_irrep(&self) -> IrrepLabel {
        IrrepLabel::SYMMETRIC
    }

    /// Closed-shell RHF energy from the integrals with the lowest
    /// `n_electrons / 2` orbitals doubly occupied.
    pub fn closed_shell_energy(&self) -> f64 {
        let nocc = self.n_electrons / 2;
        let mut e = self.e_nuclear;
        for i in 0..nocc {
            e += 2.0 * self.h[(i, i)];
            for j in 0..nocc {
                e += 2.0 * self.eri.get(i, i, j, j) - self.eri.get(i, j, j, i);
            }
        }
        e
    }
}
