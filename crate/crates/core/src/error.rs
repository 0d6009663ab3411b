use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
///
/// Every variant maps onto one of the CLI exit classes through
/// [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("config field `{field}` points to a missing path: {path}")]
    MissingPath { field: String, path: PathBuf },

    #[error("format error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Format { line: Option<usize>, message: String },

    #[error("duplicate message id {0:?}")]
    DuplicateId(String),

    #[error("line {0} has no label")]
    Unlabeled(usize),

    #[error("degenerate labels: both classes must occur")]
    DegenerateLabels,

    #[error("class {class} has {count} messages; at least 2 are needed to split")]
    TooFewSamples { class: &'static str, count: usize },

    #[error("no tokens")]
    NoTokens,

    #[error("empty vocabulary")]
    EmptyVocabulary,

    #[error("tokens not in vocabulary: {}", .0.join(", "))]
    OutOfVocabulary(Vec<String>),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn format(line: impl Into<Option<usize>>, message: impl Into<String>) -> Self {
        Error::Format {
            line: line.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the name of the pipeline stage it came from.
    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Process exit code: 2 config, 3 data/format, 4 degenerate data.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) | Error::MissingPath { .. } | Error::InvalidArgument(_) => 2,
            Error::DegenerateLabels | Error::TooFewSamples { .. } | Error::NoTokens | Error::EmptyVocabulary => 4,
            _ => 3,
        }
    }
}
