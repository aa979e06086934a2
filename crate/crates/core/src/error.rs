//! Error type shared across the toolkit.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("orbital index {index} at line {line} outside 1..={norb}")]
    Bounds { line: usize, index: usize, norb: usize },
    #[error("conflicting values for integral {key}: {first} vs {second}")]
    Consistency { key: String, first: f64, second: f64 },
    #[error("unsupported basis: {0}")]
    UnsupportedBasis(String),
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("invalid orbital selection: {0}")]
    InvalidFreeze(String),
    #[error("qubit index {index} outside a {n_qubits}-qubit register")]
    QubitIndex { index: usize, n_qubits: usize },
    #[error("{n_qubits} qubits exceeds the statevector ceiling of {max}")]
    QubitCeiling { n_qubits: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("numerical contract violated: {0}")]
    Contract(String),
    #[error("ansatz energy {evaluated} disagrees with supplied reference energy {supplied}")]
    StaleAnsatz { supplied: f64, evaluated: f64 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("sector dimension {dim} exceeds the guard of {max}")]
    DimensionGuard { dim: usize, max: usize },
    #[error("no direction of the {0}-dimensional overlap matrix survives the linear-dependence threshold")]
    DegenerateSubspace(usize),
    #[error("SCF not converged after {iterations} iterations (density change {delta:e})")]
    ScfConvergence { iterations: usize, delta: f64 },
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of a numerical contract rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Contract(_)
                | Error::StaleAnsatz { .. }
                | Error::DegenerateSubspace(_)
                | Error::ScfConvergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
