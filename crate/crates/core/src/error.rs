use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::backend::BackendError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input was not well-formed JSON. `offset` is a byte offset into the input.
    #[error("malformed JSON at byte {offset} (line {line}, column {column}): {message}")]
    Json {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed record in {path}, line {line}: {message}")]
    Record {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Backend(#[from] BackendError),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(raw: &[u8], err: &serde_json::Error) -> Self {
        let (line, column) = (err.line(), err.column());
        Error::Json {
            offset: byte_offset(raw, line, column),
            line,
            column,
            message: err.to_string(),
        }
    }
}

/// Converts serde_json's 1-based line / column into a byte offset.
fn byte_offset(raw: &[u8], line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let mut offset = 0;
    for (idx, chunk) in raw.split_inclusive(|b| *b == b'\n').enumerate() {
        if idx + 1 == line {
            return (offset + column.saturating_sub(1)).min(raw.len());
        }
        offset += chunk.len();
    }
    raw.len()
}
