//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(
        "line count mismatch: `{text_path}` has {text_lines} lines but `{labels_path}` has {label_lines}"
    )]
    LineCountMismatch {
        text_path: PathBuf,
        text_lines: usize,
        labels_path: PathBuf,
        label_lines: usize,
    },

    #[error("bad label at {path}:{line}: {message}")]
    BadLabel {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index out of range: {0}")]
    Range(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("merge table format error: {0}")]
    MergeTableFormat(String),

    #[error("vocabulary file error: {0}")]
    VocabFormat(String),

    #[error("checkpoint: unrecognized file (bad magic)")]
    CheckpointMagic,

    #[error("checkpoint: unsupported format version {0}")]
    CheckpointVersion(u32),

    #[error("checkpoint: file truncated")]
    CheckpointTruncated,

    #[error("checkpoint: content digest mismatch (file is corrupted)")]
    CheckpointCorrupt,

    #[error(
        "{artifact} hash mismatch: checkpoint references {expected} but `{path}` hashes to {actual}"
    )]
    ArtifactHashMismatch {
        artifact: String,
        expected: String,
        actual: String,
        path: PathBuf,
    },

    #[error("lock file `{0}` exists; another run may own this output path")]
    OutputLocked(PathBuf),
}

impl Error {
    /// Attach a path to a raw I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
