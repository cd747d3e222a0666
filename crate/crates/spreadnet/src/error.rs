use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Error, Debug)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] spreadnet_core::Error),
    #[error("{context}: {source}")]
    CoreAt {
        context: String,
        #[source]
        source: spreadnet_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{}: {source}", path.display())]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{file}: missing header column(s): {missing}")]
    MissingHeader { file: String, missing: String },
    #[error("{0}: no date in the filename and no date column")]
    NoDateSource(String),
    #[error("{file}: {message}")]
    Format { file: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::Io { path, source }
    }

    pub fn csv(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> Error {
        let path = path.into();
        move |source| Error::Csv { path, source }
    }

    pub fn json(path: impl Into<PathBuf>) -> impl FnOnce(serde_json::Error) -> Error {
        let path = path.into();
        move |source| Error::Json { path, source }
    }

    pub fn format(file: impl std::fmt::Display, message: impl Into<String>) -> Error {
        Error::Format {
            file: file.to_string(),
            message: message.into(),
        }
    }

    pub fn at(context: impl Into<String>) -> impl FnOnce(spreadnet_core::Error) -> Error {
        let context = context.into();
        move |source| Error::CoreAt { context, source }
    }

    /// Process exit code: 2 for invalid invocations, 1 for data errors.
    pub fn exit_code(&self) -> i32 {
        use spreadnet_core::Error as E;
        let core = match self {
            Error::Usage(_) => return 2,
            Error::Core(e) | Error::CoreAt { source: e, .. } => e,
            _ => return 1,
        };
        match core {
            E::InvalidThreshold(_) | E::InvalidConfig(_) | E::InvalidScenario(_) => 2,
            _ => 1,
        }
    }
}
