use thiserror::Error;

/// Command failures, each mapped to a distinct exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Numerical(_) => "numerical",
        }
    }
}

impl From<evdep::Error> for CliError {
    fn from(e: evdep::Error) -> Self {
        match e {
            evdep::Error::Config(m) => CliError::Usage(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
