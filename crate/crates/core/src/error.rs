use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header {path}: {reason}")]
    Header { path: PathBuf, reason: String },

    #[error("unknown dtype {0:?} (expected \"u16\" or \"f32\")")]
    UnknownDtype(String),

    #[error("payload length mismatch: expected {expected} bytes, found {found}")]
    PayloadLength { expected: usize, found: usize },

    #[error("non-finite value at sample {0}")]
    NonFinite(usize),

    #[error("ground truth needs at least 2 distinct nonzero classes, found {0}")]
    TooFewClasses(usize),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("variables differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("joint entropy is zero")]
    ZeroJointEntropy,

    #[error("invalid scene spec: {0}")]
    Spec(String),

    #[error("no closed-form distribution: {0}")]
    NoClosedForm(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// True for errors caused by parameter choices rather than by unreadable
    /// or malformed inputs. The CLI maps these to a distinct exit status.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::ZeroJointEntropy | Error::NoClosedForm(_)
        )
    }
}
