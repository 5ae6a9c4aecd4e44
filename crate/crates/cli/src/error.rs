use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    MissingManifest(String),

    /// A computation failed inside one module.
    #[error("{module}: {source}")]
    Module {
        module: &'static str,
        #[source]
        source: adsmax_core::Error,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::MissingManifest(_) => 2,
            _ => 1,
        }
    }

    pub fn module(module: &'static str) -> impl FnOnce(adsmax_core::Error) -> CliError {
        move |source| CliError::Module { module, source }
    }

    pub fn io(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
