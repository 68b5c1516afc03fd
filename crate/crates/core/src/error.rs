use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter shape mismatch: circuit expects {expected} parameters, got {got}")]
    ParamShape { expected: usize, got: usize },

    #[error("dimension mismatch: state has {state} amplitudes, operator acts on {operator}")]
    DimensionMismatch { state: usize, operator: usize },

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("operator is not Hermitian (residue {residue:.3e})")]
    NonHermitian { residue: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(
        "shot sampling requires a dense eigendecomposition, unavailable for {qubits} qubits; \
         use the gaussian noise mode instead"
    )]
    UnsupportedNoiseMode { qubits: usize },

    #[error("flat direction: zero amplitude admits no positive PL constant")]
    FlatDirection,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("unknown optimizer kind `{0}`")]
    UnknownOptimizer(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
