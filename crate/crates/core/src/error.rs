use thiserror::Error;

/// Errors raised by measure construction, transport solvers and experiments.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("shape mismatch: (d={d_a}, T={t_a}) vs (d={d_b}, T={t_b})")]
    ShapeMismatch {
        d_a: usize,
        t_a: usize,
        d_b: usize,
        t_b: usize,
    },

    #[error("non-finite value {value} at position {idx}")]
    NonFinite { idx: usize, value: f64 },

    #[error("invalid weight {value} at atom {idx}")]
    InvalidWeight { idx: usize, value: f64 },

    #[error("weights do not sum to one: sum={sum}")]
    NotNormalized { sum: f64 },

    #[error("empty measure")]
    Empty,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("duplicate shift vector at index {0}")]
    DuplicateZeta(usize),

    #[error("shift vector {0} lies outside the open box (0, 1/(2G))")]
    ZetaOutOfRange(usize),

    #[error("instance too large for the LP oracle: {pairs} atom pairs (limit {limit})")]
    InstanceTooLarge { pairs: usize, limit: usize },

    #[error("transport solver did not converge after {0} pivots")]
    NoConvergence(usize),

    #[error("LP solver failed: {0}")]
    Lp(String),

    #[error("experiment failed at N={n}, trial {trial}: {source}")]
    Trial {
        n: usize,
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
