use std::fmt;
use std::path::Path;
use std::process::ExitCode;

use gpool::PoolError;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;
pub const EXIT_INPUT: u8 = 4;
pub const EXIT_MISSING_LABELS: u8 = 5;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    MissingLabels(String),
    Input(String),
    Pool(PoolError),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::MissingLabels(_) => EXIT_MISSING_LABELS,
            Self::Input(_) => EXIT_INPUT,
            Self::Pool(e) => match e {
                PoolError::InvalidArgument(_)
                | PoolError::IncompatibleConnector { .. }
                | PoolError::UnknownLoss(_)
                | PoolError::UnknownReduce(_) => EXIT_USAGE,
                PoolError::Io(_)
                | PoolError::Parse { .. }
                | PoolError::IndexOutOfRange { .. }
                | PoolError::NonFiniteWeight { .. }
                | PoolError::FeatureShapeMismatch { .. }
                | PoolError::LabelShapeMismatch { .. }
                | PoolError::StaleCache { .. }
                | PoolError::CorruptRecord { .. }
                | PoolError::MissingRecord(_) => EXIT_INPUT,
                _ => EXIT_RUNTIME,
            },
        })
    }

    /// Attaches a path to an I/O or parse failure.
    pub fn at(path: &Path) -> impl FnOnce(PoolError) -> CliError + '_ {
        move |e| match e {
            PoolError::Io(_) | PoolError::Parse { .. } => {
                CliError::Input(format!("{}: {e}", path.display()))
            }
            other => CliError::Pool(other),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::MissingLabels(m) | Self::Input(m) => f.write_str(m),
            Self::Pool(e) => write!(f, "{e}"),
        }
    }
}

impl From<PoolError> for CliError {
    fn from(e: PoolError) -> Self {
        Self::Pool(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Input(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::Input(format!("json: {e}"))
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;
