use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] dolinar_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl CliError {
    /// 2 invalid spec, 3 solver failure, 4 singular control, 1 I/O.
    pub fn exit_code(&self) -> i32 {
        use dolinar_core::Error as E;
        match self {
            CliError::Spec(_) => 2,
            CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                E::Domain { .. } | E::TooLarge { .. } | E::InvalidArgument(_) => 2,
                E::NoSignChange { .. }
                | E::BracketNotFound { .. }
                | E::MaxIterations { .. }
                | E::StepUnderflow { .. } => 3,
                E::Singular { .. } | E::MajorantOverflow { .. } => 4,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
