use std::path::Path;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Arguments violate an operation's precondition (dimension mismatch, bad depth, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An operation needs at least one element (valid pixel, gt entry, frame) and got none.
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    /// A file was readable but its contents are truncated or malformed.
    #[error("malformed file: {0}")]
    Format(String),
    /// Every frame whose inputs are missing, listed before aborting.
    #[error("missing files for {} frame(s): {}", .0.len(), .0.join(", "))]
    MissingFiles(Vec<String>),
}

impl Error {
    pub(crate) fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for anything touching the filesystem, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Format(_) | Error::MissingFiles(_) => 2,
            _ => 1,
        }
    }
}
