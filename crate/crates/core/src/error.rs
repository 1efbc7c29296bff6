use thiserror::Error;

/// Errors produced anywhere in the encode / compute / decode pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error on {axis}: {detail}")]
    Dimension { axis: &'static str, detail: String },

    #[error("empty matrix")]
    EmptyMatrix,

    #[error("reference matrix is identically zero")]
    ZeroReference,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("insufficient workers: {got} supplied, recovery threshold is {tau}")]
    InsufficientWorkers { tau: usize, got: usize },

    #[error("insufficient results: {got} supplied, recovery threshold is {tau}")]
    InsufficientResults { tau: usize, got: usize },

    #[error("duplicate evaluation point at positions {first} and {second}")]
    DuplicatePoint { first: usize, second: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("negative power of the base on an integer backend (exponent {0})")]
    NegativePower(i32),

    #[error("entry ({row}, {col}) of block ({block_row}, {block_col}): decoded {value} violates bound {bound}")]
    BoundViolation {
        block_row: usize,
        block_col: usize,
        row: usize,
        col: usize,
        value: i128,
        bound: u64,
    },

    #[error("entry ({row}, {col}) of block ({block_row}, {block_col}): coefficient {detail}")]
    Unrecoverable {
        block_row: usize,
        block_col: usize,
        row: usize,
        col: usize,
        detail: String,
    },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("job failed: only {succeeded} of the required {tau} workers completed (failed: {failed:?})")]
    JobFailed {
        tau: usize,
        succeeded: usize,
        failed: Vec<usize>,
    },

    #[error("malformed matrix file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::File { .. } | Error::Csv(_) | Error::Format(_) => 4,
            Error::Singular(_)
            | Error::BoundViolation { .. }
            | Error::Unrecoverable { .. }
            | Error::Overflow(_)
            | Error::InsufficientResults { .. }
            | Error::JobFailed { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
