use thiserror::Error;

/// Errors raised while building or analysing operators, observables and channels.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has zero dimension")]
    Empty,

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace {0} differs from 1")]
    InvalidTrace(f64),

    #[error("Bloch vector norm {0} exceeds 1")]
    InvalidBloch(f64),

    #[error("invalid qubit observable parameters: bias {bias}, Bloch norm {norm}")]
    InvalidQubitParams { bias: f64, norm: f64 },

    #[error("effects do not sum to the identity (max deviation {0:e})")]
    NotNormalized(f64),

    #[error("effect {index} is not positive (min eigenvalue {min_eig:e})")]
    NegativeEffect { index: usize, min_eig: f64 },

    #[error("observable has no outcomes")]
    NoOutcomes,

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("relabeling mismatch: {0}")]
    RelabelMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("joint cell {cell:?} is not positive (min eigenvalue {min_eig:e})")]
    NegativeCell { cell: Vec<usize>, min_eig: f64 },

    #[error("observables do not commute (commutator norm {0:e})")]
    NonCommuting(f64),

    #[error("expected a dichotomic observable, found {0} outcomes")]
    NotDichotomic(usize),

    #[error("joint grid has {cells} cells, exceeding the cap of {cap}")]
    GridTooLarge { cells: usize, cap: usize },

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("parse error at {path}: {msg}")]
    Parse { path: String, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
