use thiserror::Error;

pub type Result<T, E = EgtlError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum EgtlError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series or iteration hit its hard cap before reaching tolerance.
    #[error("{context} did not converge after {iterations} iterations")]
    NonConvergence {
        context: &'static str,
        iterations: usize,
    },

    /// The data cannot support the requested computation.
    #[error("data quality: {message}")]
    DataQuality {
        message: String,
        indices: Vec<usize>,
    },

    /// A moment equation has no sign change on its bracket.
    #[error("no root: {0}")]
    NoRoot(String),

    /// A posterior grid put almost all of its mass in one cell.
    #[error("degenerate posterior: {0}")]
    DegeneratePosterior(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown dataset or missing file: {0}")]
    NotFound(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl EgtlError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        EgtlError::Domain(msg.into())
    }
}
