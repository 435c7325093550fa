use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: Vec<usize>,
        found: Vec<usize>,
    },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("operator is not {kind}: deviation {deviation:e}")]
    InvalidOperator { kind: &'static str, deviation: f64 },

    #[error("state is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("subsystem `{label}` has dimension {dim}; only qubits can be measured")]
    NotAQubit { label: String, dim: usize },

    #[error("subsystem `{0}` is not in a definite basis state")]
    NotDiscardable(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid basis label `{0}`")]
    InvalidBasis(String),

    #[error("quantum dot id {0} used more than once")]
    QdCollision(u32),

    #[error("cavity truncation inadequate: top Fock population {population:e} exceeds {limit:e} at n_max = {n_max}")]
    Truncation {
        population: f64,
        limit: f64,
        n_max: usize,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("configuration error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
