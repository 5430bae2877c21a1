use extrinsiq_core::Error;

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed file: {0}")]
    Format(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0} did not converge")]
    NotConverged(String),
}

impl CliError {
    /// 0 ok, 1 IO or malformed data, 2 insufficient data, 3 non-convergence,
    /// 64 usage.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Format(_) => 1,
            CliError::Usage(_) => 64,
            CliError::NotConverged(_) => 3,
            CliError::Core(e) => match e {
                Error::InsufficientViews(_)
                | Error::NoReturns
                | Error::NoConsensus(_)
                | Error::DisconnectedGraph => 2,
                Error::DidNotConverge | Error::NumericalFailure => 3,
                Error::UnknownSensor(_) | Error::WrongSensorKind(_) | Error::InvalidInput(_) => 64,
                _ => 1,
            },
        }
    }
}
