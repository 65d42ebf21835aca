use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("i/o error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed tensor container: {0}")]
    Container(String),

    #[error("missing tensor `{0}`")]
    MissingTensor(String),

    #[error("tensor `{name}` has shape {actual:?}, expected {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: Vec<usize>,
        actual: Vec<usize>,
    },

    #[error("tensor `{name}` data length {len} does not match shape {shape:?}")]
    DataLength {
        name: String,
        shape: Vec<usize>,
        len: usize,
    },

    #[error("duplicate tensor name `{0}`")]
    DuplicateTensor(String),

    #[error("tensor `{name}` holds a non-finite value at element {index}")]
    NonFinite { name: String, index: usize },

    #[error("tensor `{name}` has unsupported dtype {dtype}")]
    UnsupportedDtype { name: String, dtype: String },

    #[error("invalid model config: {0}")]
    Config(String),

    #[error("empty token sequence")]
    EmptySequence,

    #[error("context overflow: need {required} positions, model allows {available}")]
    ContextOverflow { required: usize, available: usize },

    #[error("token id {id} out of range for vocabulary of {vocab_size}")]
    TokenOutOfRange { id: u32, vocab_size: usize },

    #[error("invalid vocabulary: {0}")]
    Vocab(String),

    #[error("line {line}: {message}")]
    Record { line: usize, message: String },

    #[error("line {line}: unknown label `{value}`")]
    UnknownLabel { line: usize, value: String },

    #[error("line {line}: missing field `{field}`")]
    MissingField { line: usize, field: String },

    #[error("dataset too small: {n} records, need at least {needed}")]
    DatasetTooSmall { n: usize, needed: usize },

    #[error("dataset `{0}` has a neutral label and cannot be used for label entropy")]
    NeutralLabel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    TomlDe(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Process exit status: 1 for configuration, 2 for data or weights,
    /// 3 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::TomlDe(_) | Error::NeutralLabel(_) => 1,
            Error::MissingFile(_)
            | Error::Io { .. }
            | Error::Container(_)
            | Error::MissingTensor(_)
            | Error::ShapeMismatch { .. }
            | Error::DataLength { .. }
            | Error::DuplicateTensor(_)
            | Error::NonFinite { .. }
            | Error::UnsupportedDtype { .. }
            | Error::Vocab(_)
            | Error::Record { .. }
            | Error::UnknownLabel { .. }
            | Error::MissingField { .. }
            | Error::DatasetTooSmall { .. }
            | Error::Json(_)
            | Error::Csv(_) => 2,
            Error::EmptySequence | Error::ContextOverflow { .. } | Error::TokenOutOfRange { .. } => 3,
        }
    }
}
