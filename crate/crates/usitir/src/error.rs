use thiserror::Error;

/// Errors raised by operator, thermodynamic, control and engine routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid operator: hermiticity residual {residual:e} exceeds tolerance {tol:e}")]
    NonHermitian { residual: f64, tol: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),

    #[error("unsupported statistics: operation requires {required}, got {got}")]
    UnsupportedStatistics { required: String, got: String },

    #[error("domain error: scalar function undefined at eigenvalue {0}")]
    FunctionDomain(f64),

    #[error("site index {site} out of range for {n_qubits} qubits")]
    SiteOutOfRange { site: usize, n_qubits: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSubsystems(String),

    #[error("invalid Hilbert space: {0}")]
    InvalidSpace(String),

    #[error(
        "pure-limit error: state has an eigenvalue below the floor {floor:e}; \
         thermalizing it needs Hamiltonians with infinite energy differences"
    )]
    PureLimit { floor: f64 },

    #[error("incompatible control set: {0}")]
    IncompatibleControlSet(String),

    #[error("bracket expansion exceeded limit {0} without enclosing the target")]
    BracketExpansion(usize),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

pub type Result<T> = std::result::Result<T, Error>;
