use std::path::PathBuf;

/// Errors raised while reading, writing or validating files.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("schema: {0}")]
    Schema(String),
    #[error("{path}: invalid schema file: {source}")]
    SchemaFile {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{path}: no usable rows ({skipped} skipped)")]
    NoUsableRows { path: PathBuf, skipped: usize },
    #[error("{path}, line {line}: {reason}")]
    Format { path: PathBuf, line: usize, reason: String },
    #[error("encoding: {0}")]
    Encode(String),
    #[error(transparent)]
    Core(#[from] fairbound_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
