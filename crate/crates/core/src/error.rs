use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error in {file}: {message}")]
    Format { file: String, message: String },

    #[error("format error in {file} line {line}: {message}")]
    FormatLine {
        file: String,
        line: usize,
        message: String,
    },

    #[error("missing PLY property `{0}`")]
    MissingProperty(String),

    #[error("inconsistent model: {0}")]
    Consistency(String),

    #[error("unknown id {0}")]
    Key(u64),

    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("node {0} is isolated (zero degree)")]
    IsolatedNode(u32),

    #[error("clustering failed: {0}")]
    ClusteringFailed(String),

    #[error("degenerate boundary between regions {0} and {1}: all projections coincide")]
    DegenerateBoundary(usize, usize),

    #[error("region {0} has no cameras")]
    DegenerateRegion(usize),

    #[error("interior of region {0} collapsed after shrinking its boundaries")]
    InteriorCollapsed(usize),

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error("oracle input too large: n = {n} exceeds {max}")]
    OracleSize { n: usize, max: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(file: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format {
            file: file.into(),
            message: message.into(),
        }
    }

    pub(crate) fn line(file: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::FormatLine {
            file: file.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code for this error: 2 = format, 3 = degenerate input, 4 = clustering.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format { .. }
            | Error::FormatLine { .. }
            | Error::MissingProperty(_)
            | Error::Consistency(_)
            | Error::Key(_)
            | Error::Io { .. } => 2,
            Error::DegenerateGraph(_)
            | Error::IsolatedNode(_)
            | Error::DegenerateBoundary(..)
            | Error::DegenerateRegion(_)
            | Error::InteriorCollapsed(_)
            | Error::Generation(_)
            | Error::Precondition(_) => 3,
            Error::ClusteringFailed(_) | Error::OracleSize { .. } => 4,
        }
    }
}
