use thiserror::Error;

/// Errors raised anywhere in the imaging pipeline.
#[derive(Debug, Error)]
pub enum MusicError {
    /// An argument lies outside the domain of a numerical kernel.
    #[error("domain error: {0}")]
    Domain(String),

    /// Invalid scene, arc, grid or experiment configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Vector or matrix shapes that do not fit together.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numerical procedure failed (singular system, non-convergence, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl MusicError {
    /// Process exit code used by the CLI: 1 for validation problems, 2 for
    /// numerical or runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            MusicError::Domain(_) | MusicError::Config(_) | MusicError::Dimension(_) => 1,
            MusicError::Json(_) => 1,
            MusicError::Numerical(_) | MusicError::Io { .. } => 2,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        MusicError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, MusicError>;
