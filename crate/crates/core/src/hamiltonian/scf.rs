use super::gaussian::{AoIntegrals, BasisSet};
use crate::error::{Error, Result};
use crate::symmetry::{IrrepLabel, PointGroup, D2H_OPERATIONS};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

const DENSITY_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 300;
const DIIS_DEPTH: usize = 8;
const POSITION_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct RhfResult {
    pub energy: f64,
    pub orbital_energies: Vec<f64>,
    /// AO x MO coefficients, columns in ascending orbital energy.
    pub coefficients: DMatrix<f64>,
    pub irreps: Vec<IrrepLabel>,
    pub point_group: PointGroup,
    pub iterations: usize,
}

/// Function permutations for each D2h operation, or None if the molecule
/// (with its basis) is not D2h-symmetric about the origin.
fn d2h_permutations(basis: &BasisSet) -> Option<Vec<Vec<usize>>> {
    let offsets: Vec<usize> = basis
        .atoms
        .iter()
        .scan(0, |acc, a| {
            let o = *acc;
            *acc += a.shells.len();
            Some(o)
        })
        .collect();
    let mut perms = Vec::with_capacity(8);
    for op in &D2H_OPERATIONS {
        let mut perm = vec![0; basis.n_functions()];
        for (i, a) in basis.atoms.iter().enumerate() {
            let image = op.apply(a.position);
            let j = basis.atoms.iter().position(|b| {
                b.charge == a.charge
                    && b.shells == a.shells
                    && (0..3).all(|k| (b.position[k] - image[k]).abs() < POSITION_TOL)
            })?;
            for s in 0..a.shells.len() {
                perm[offsets[i] + s] = offsets[j] + s;
            }
        }
        perms.push(perm);
    }
    Some(perms)
}

/// Symmetry-adapted orthonormal (in the AO metric) combinations grouped by irrep.
fn symmetry_blocks(basis: &BasisSet, s: &DMatrix<f64>) -> (PointGroup, Vec<(IrrepLabel, DMatrix<f64>)>) {
    let n = s.nrows();
    let (group, perms) = match d2h_permutations(basis) {
        Some(p) => (PointGroup::D2h, p),
        None => (PointGroup::C1, vec![(0..n).collect()]),
    };
    let n_irreps = group.order();
    let mut blocks = Vec::new();
    for g in 0..n_irreps {
        let label = IrrepLabel(g);
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for mu in 0..n {
            let mut v = DVector::zeros(n);
            for (op, perm) in D2H_OPERATIONS.iter().zip(&perms) {
                v[perm[mu]] += op.character(label) / perms.len() as f64;
            }
            if v.amax() > 1e-12 {
                cols.push(v);
            }
        }
        if cols.is_empty() {
            continue;
        }
        let c = DMatrix::from_columns(&cols);
        let metric = c.transpose() * s * &c;
        let eig = SymmetricEigen::new(metric);
        let max = eig.eigenvalues.amax();
        let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&k| eig.eigenvalues[k] > 1e-9 * max).collect();
        if keep.is_empty() {
            continue;
        }
        let x = DMatrix::from_columns(
            &keep
                .iter()
                .map(|&k| &c * eig.eigenvectors.column(k) / eig.eigenvalues[k].sqrt())
                .collect::<Vec<_>>(),
        );
        blocks.push((label, x));
    }
    (group, blocks)
}

fn fock(ao: &AoIntegrals, hcore: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let n = hcore.nrows();
    let mut f = hcore.clone();
    for mu in 0..n {
        for nu in 0..=mu {
            let mut g = 0.0;
            for la in 0..n {
                for si in 0..n {
                    let dls = d[(la, si)];
                    if dls != 0.0 {
                        g += dls * (ao.eri.get(mu, nu, la, si) - 0.5 * ao.eri.get(mu, la, nu, si));
                    }
                }
            }
            f[(mu, nu)] += g;
            if mu != nu {
                f[(nu, mu)] += g;
            }
        }
    }
    f
}

struct Orbitals {
    energies: Vec<f64>,
    coefficients: DMatrix<f64>,
    irreps: Vec<IrrepLabel>,
}

fn diagonalize(f: &DMatrix<f64>, blocks: &[(IrrepLabel, DMatrix<f64>)]) -> Orbitals {
    let mut all: Vec<(f64, IrrepLabel, DVector<f64>)> = Vec::new();
    for (label, x) in blocks {
        let fb = x.transpose() * f * x;
        let fb = (&fb + fb.transpose()) * 0.5;
        let eig = SymmetricEigen::new(fb);
        for k in 0..eig.eigenvalues.len() {
            let mut c = x * eig.eigenvectors.column(k);
            let imax = c.iamax();
            if c[imax] < 0.0 {
                c = -c;
            }
            all.push((eig.eigenvalues[k], *label, c));
        }
    }
    all.sort_by(|a, b| {
        if (a.0 - b.0).abs() < 1e-8 {
            a.1.cmp(&b.1)
        } else {
            a.0.total_cmp(&b.0)
        }
    });
    Orbitals {
        energies: all.iter().map(|o| o.0).collect(),
        irreps: all.iter().map(|o| o.1).collect(),
        coefficients: DMatrix::from_columns(&all.iter().map(|o| o.2.clone()).collect::<Vec<_>>()),
    }
}

fn density(c: &DMatrix<f64>, nocc: usize) -> DMatrix<f64> {
    let occ = c.columns(0, nocc);
    &occ * occ.transpose() * 2.0
}

/// Closed-shell restricted Hartree-Fock in symmetry-adapted blocks.
pub fn run_rhf(basis: &BasisSet) -> Result<RhfResult> {
    let ao = basis.ao_integrals()?;
    let nelec = basis.n_electrons()?;
    if nelec % 2 != 0 {
        return Err(Error::Geometry(format!("{nelec} electrons cannot form a closed shell")));
    }
    let nocc = nelec / 2;
    let n = ao.overlap.nrows();
    if nocc > n {
        return Err(Error::Geometry(format!("{nocc} doubly occupied orbitals exceed {n} basis functions")));
    }
    let (point_group, blocks) = symmetry_blocks(basis, &ao.overlap);
    let hcore = &ao.kinetic + &ao.nuclear;
    let mut orbs = diagonalize(&hcore, &blocks);
    let mut d = density(&orbs.coefficients, nocc);
    let mut history: Vec<(DMatrix<f64>, DMatrix<f64>)> = Vec::new();
    let mut delta = f64::INFINITY;
    for iter in 1..=MAX_ITERATIONS {
        let f = fock(&ao, &hcore, &d);
        let err = &f * &d * &ao.overlap - &ao.overlap * &d * &f;
        history.push((f.clone(), err));
        if history.len() > DIIS_DEPTH {
            history.remove(0);
        }
        let f_use = diis_extrapolate(&history).unwrap_or(f);
        orbs = diagonalize(&f_use, &blocks);
        let d_new = density(&orbs.coefficients, nocc);
        delta = (&d_new - &d).amax();
        d = d_new;
        if delta < DENSITY_TOL {
            let f = fock(&ao, &hcore, &d);
            let orbs = diagonalize(&f, &blocks);
            let d = density(&orbs.coefficients, nocc);
            let energy = ao.e_nuclear + 0.5 * d.component_mul(&(&hcore + &f)).sum();
            return Ok(RhfResult {
                energy,
                orbital_energies: orbs.energies,
                coefficients: orbs.coefficients,
                irreps: orbs.irreps,
                point_group,
                iterations: iter,
            });
        }
    }
    Err(Error::ScfConvergence { iterations: MAX_ITERATIONS, delta })
}

fn diis_extrapolate(history: &[(DMatrix<f64>, DMatrix<f64>)]) -> Option<DMatrix<f64>> {
    let m = history.len();
    if m < 2 {
        return None;
    }
    let mut b = DMatrix::zeros(m + 1, m + 1);
    for i in 0..m {
        for j in 0..m {
            b[(i, j)] = history[i].1.dot(&history[j].1);
        }
        b[(i, m)] = -1.0;
        b[(m, i)] = -1.0;
    }
    let mut rhs = DVector::zeros(m + 1);
    rhs[m] = -1.0;
    let coef = b.lu().solve(&rhs)?;
    if coef.iter().any(|c| !c.is_finite()) {
        return None;
    }
    let mut f = DMatrix::zeros(history[0].0.nrows(), history[0].0.ncols());
    for i in 0..m {
        f += &history[i].0 * coef[i];
    }
    Some(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::gaussian::{Atom, Contraction};

    fn sto3g_h(pos: [f64; 3]) -> Atom {
        Atom {
            charge: 1.0,
            position: pos,
            shells: vec![Contraction::s(&[3.42525091, 0.62391373, 0.16885540], &[0.15432897, 0.53532814, 0.44463454])],
        }
    }

    #[test]
    fn h2_sto3g_energy() {
        // -1.1167 Ha at R = 1.4 bohr for STO-3G
        let basis = BasisSet { atoms: vec![sto3g_h([0.0, 0.0, -0.7]), sto3g_h([0.0, 0.0, 0.7])], charge: 0 };
        let rhf = run_rhf(&basis).unwrap();
        assert!((rhf.energy - (-1.1167)).abs() < 1e-4, "{}", rhf.energy);
        assert_eq!(rhf.point_group, PointGroup::D2h);
        let g = PointGroup::D2h;
        assert_eq!(rhf.irreps, vec![g.label_from_name("Ag").unwrap(), g.label_from_name("B1u").unwrap()]);
    }

    #[test]
    fn orbitals_are_orthonormal_and_symmetry_pure() {
        let basis = BasisSet {
            atoms: vec![
                sto3g_h([1.0, 0.7, 0.0]),
                sto3g_h([-1.0, 0.7, 0.0]),
                sto3g_h([1.0, -0.7, 0.0]),
                sto3g_h([-1.0, -0.7, 0.0]),
            ],
            charge: 0,
        };
        let rhf = run_rhf(&basis).unwrap();
        let ao = basis.ao_integrals().unwrap();
        let c = &rhf.coefficients;
        let metric = c.transpose() * &ao.overlap * c;
        assert!((&metric - DMatrix::identity(4, 4)).amax() < 1e-10);
        let perms = d2h_permutations(&basis).unwrap();
        for (k, &label) in rhf.irreps.iter().enumerate() {
            for (op, perm) in D2H_OPERATIONS.iter().zip(&perms) {
                for mu in 0..4 {
                    let image = c[(perm[mu], k)];
                    assert!((image - op.character(label) * c[(mu, k)]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn asymmetric_molecule_falls_back_to_c1() {
        let basis = BasisSet {
            atoms: vec![sto3g_h([0.0, 0.0, 0.0]), sto3g_h([0.0, 0.0, 1.4]), sto3g_h([0.3, 0.9, 0.1])],
            charge: 1,
        };
        let rhf = run_rhf(&basis).unwrap();
        assert_eq!(rhf.point_group, PointGroup::C1);
        assert!(rhf.irreps.iter().all(|l| l.is_symmetric()));
    }

    #[test]
    fn energy_matches_integral_expression() {
        let basis = BasisSet { atoms: vec![sto3g_h([0.0, 0.0, -0.8]), sto3g_h([0.0, 0.0, 0.8])], charge: 0 };
        let rhf = run_rhf(&basis).unwrap();
        let ints = crate::hamiltonian::build_s_integrals(&basis, &crate::hamiltonian::OrbitalChoice::Rhf).unwrap();
        assert!((ints.closed_shell_energy() - rhf.energy).abs() < 1e-10);
    }
}
