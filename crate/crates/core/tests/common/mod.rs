#![allow(dead_code)]

use nalgebra::DMatrix;
use qeom_core::config::RunConfig;
use qeom_core::hamiltonian::{assemble, Eri, IntegralSet, MolecularHamiltonian};
use qeom_core::pipeline::load_system;
use qeom_core::symmetry::{IrrepLabel, PointGroup};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closed-shell Hamiltonian with random real integrals carrying the full
/// eightfold permutational symmetry, no point group.
pub fn random_hamiltonian(n_orbitals: usize, n_electrons: usize, seed: u64) -> MolecularHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = DMatrix::zeros(n_orbitals, n_orbitals);
    for p in 0..n_orbitals {
        for q in 0..=p {
            let v = if p == q { rng.gen_range(-2.0..0.0) } else { rng.gen_range(-0.3..0.3) };
            h[(p, q)] = v;
            h[(q, p)] = v;
        }
    }
    let mut eri = Eri::zeros(n_orbitals);
    for p in 0..n_orbitals {
        for q in 0..n_orbitals {
            for r in 0..n_orbitals {
                for s in 0..n_orbitals {
                    let v = if p == q && r == s { rng.gen_range(0.2..0.8) } else { rng.gen_range(-0.1..0.1) };
                    eri.set(p, q, r, s, v);
                }
            }
        }
    }
    let ints = IntegralSet {
        n_orbitals,
        n_electrons,
        ms2: 0,
        e_nuclear: rng.gen_range(0.0..1.0),
        h,
        eri,
        orbital_irreps: vec![IrrepLabel::SYMMETRIC; n_orbitals],
        point_group: PointGroup::C1,
    };
    assemble(&ints, &[], None).expect("valid random integrals")
}

pub fn config(text: &str) -> RunConfig {
    RunConfig::parse(text, &[]).expect("valid test configuration")
}

pub fn builtin(text: &str) -> MolecularHamiltonian {
    load_system(&config(text)).expect("builtin system").mh
}

/// Square of four hydrogens, 8 spin orbitals under D2h.
pub fn h4() -> MolecularHamiltonian {
    use qeom_core::hamiltonian::{build_s_integrals, h8_basis, parse_layout, OrbitalChoice};
    let layout = parse_layout("H 1.0 1.6 0 0 0 0\nH -1.0 1.6 0 0 0 0\nH 1.0 -1.6 0 0 0 0\nH -1.0 -1.6 0 0 0 0\n").unwrap();
    let ints = build_s_integrals(&h8_basis(0.0, &layout).unwrap(), &OrbitalChoice::Rhf).unwrap();
    assemble(&ints, &[], None).unwrap()
}
