use thiserror::Error;

#[derive(Debug, Error)]
pub enum LhfError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: expected {expected} points, got {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("inconsistent occupation: {0}")]
    Consistency(String),

    #[error("eigensolver failed for l={l}, nodes={nodes}: bracket [{lower:.6e}, {upper:.6e}] after {iterations} shots")]
    Eigensolver {
        l: usize,
        nodes: usize,
        lower: f64,
        upper: f64,
        iterations: usize,
    },

    #[error("unbound species: {0}")]
    Unbound(String),

    #[error("SCF did not converge after {iterations} iterations (last potential change {last_change:.3e}, last energy change {last_energy_change:.3e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        last_energy_change: f64,
        history: Vec<(f64, f64)>,
    },

    #[error("singular linear system in exchange solve: {0}")]
    Singular(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, LhfError>;
