//! Second-quantized operators, excitations and operator pools.

mod excitation;
mod ladder;
mod pool;

pub use excitation::{
    count_excitations, enumerate_excitations, excitation_irrep, Excitation, ReferenceSpace,
};
pub use ladder::{apply_ladders, create, annihilate, FermionSum, Ladder};
pub use pool::{spin_adapted_pool, spin_orbital_pool, PoolKind, PoolOperator};
