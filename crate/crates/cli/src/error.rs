use std::path::PathBuf;

pub const EXIT_SUCCESS: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_NOT_CONVERGED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA_FORMAT: u8 = 65;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] potts_core::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use potts_core::Error as E;
        match self {
            Self::Io { .. } => EXIT_IO,
            Self::Usage(_) => EXIT_USAGE,
            Self::Format(_) => EXIT_DATA_FORMAT,
            Self::Core(E::InvalidParameter { .. } | E::DisconnectedCoupling | E::SignalTooLong { .. }) => EXIT_USAGE,
            Self::Core(_) => EXIT_DATA_FORMAT,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
