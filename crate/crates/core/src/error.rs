use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The caller violated an operation's precondition.
    #[error("usage error: {0}")]
    Usage(String),

    /// A formula, configuration or setting set does not fit the space it is used with.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("space has {size} configurations, which exceeds the cap of {cap}")]
    SpaceTooLarge { size: String, cap: u64 },

    #[error("parse error at offset {offset}: {message}")]
    Parse { offset: usize, message: String },

    /// Every validation problem found in a loaded document.
    #[error("invalid document:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),

    #[error("oracle failed on configuration `{config}`{}: {message}", test_suffix(.test))]
    Oracle {
        config: String,
        test: Option<String>,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

fn test_suffix(test: &Option<String>) -> String {
    match test {
        Some(t) => format!(" (test `{t}`)"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(offset: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            offset,
            message: message.into(),
        }
    }
}
