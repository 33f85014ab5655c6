use std::path::PathBuf;

/// Errors raised anywhere in the pipeline.
///
/// Every variant maps onto one of the CLI exit codes through [`Error::exit_code`].
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("missing artifact: {0}")]
    MissingArtifact(String),
    #[error("ingestion error: {0}")]
    Ingestion(String),
    #[error("feature extraction error: {0}")]
    Feature(String),
    #[error("training error: {0}")]
    Training(String),
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// 0 success, 1 usage/config, 2 ingestion, 3 numeric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::MissingArtifact(_) => 1,
            Error::Ingestion(_) | Error::Io { .. } => 2,
            Error::Feature(_) | Error::Training(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
            Error::MissingArtifact(_) => "missing_artifact",
            Error::Ingestion(_) => "ingestion",
            Error::Feature(_) => "feature",
            Error::Training(_) => "training",
            Error::Io { .. } => "io",
        }
    }

    /// Machine-readable form written to stderr by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        })
    }
}
