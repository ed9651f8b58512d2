use thiserror::Error;

/// Errors raised by the estimation pipeline and its file formats.
#[derive(Debug, Error)]
pub enum FofError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("covariance surface is not symmetric (max defect {defect:.3e})")]
    Asymmetric { defect: f64 },

    #[error(
        "truncation {requested} exceeds the usable rank {rank} \
         (eigenvalues below the cut-off {cutoff:.3e} are discarded)"
    )]
    IllConditionedTruncation {
        requested: usize,
        rank: usize,
        cutoff: f64,
    },

    #[error("basis is not orthonormal (max defect {defect:.3e})")]
    NotOrthonormal { defect: f64 },

    #[error("{file}:{line}:{column}: {message}")]
    Parse {
        file: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl FofError {
    /// Process exit code for the CLI: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            FofError::Config(_) => 1,
            FofError::InvalidGrid(_)
            | FofError::GridMismatch(_)
            | FofError::InvalidInput(_)
            | FofError::Parse { .. }
            | FofError::Io { .. } => 2,
            FofError::Asymmetric { .. }
            | FofError::IllConditionedTruncation { .. }
            | FofError::NotOrthonormal { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, FofError>;
