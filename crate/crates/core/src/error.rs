use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {0} appears more than once in a term support")]
    DuplicateIndex(usize),

    #[error("index {index} out of range (bound {bound})")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("{n} qubits exceeds the dense cap of {n_max}")]
    TooLarge { n: usize, n_max: usize },

    #[error("spectral gap undefined on a one-dimensional space")]
    Dimension,

    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("binary search failed to converge after {rounds} rounds")]
    NonConvergence { rounds: usize },

    #[error("search precision {eps} too coarse for promise gap (need eps <= {max})")]
    ConfigTooCoarse { eps: f64, max: f64 },

    #[error("invalid search configuration: {0}")]
    SearchConfig(String),

    #[error("{count} invalid queries exceeds adversary cap {cap}")]
    TooManyInvalid { count: usize, cap: usize },

    #[error("machine exceeded its query bound of {q_max} on some answer path")]
    PathTooDeep { q_max: usize },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("parse error in field `{field}`: {reason}")]
    Parse { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
