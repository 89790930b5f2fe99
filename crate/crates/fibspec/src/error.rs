//! Failure classes of a command run and their process exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed or missing flags.
    #[error("bad flags: {0}")]
    BadFlags(String),
    /// A flag value outside the operation's domain.
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("not found: {0}")]
    NotFound(String),
    /// A numerical self-check failed.
    #[error("internal assertion failed: {0}")]
    Internal(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::BadFlags(_) => 2,
            CliError::Precondition(_) => 3,
            CliError::NotFound(_) => 4,
            CliError::Internal(_) => 5,
            CliError::Io(_) => 1,
        }
    }
}

impl From<fibspec_core::Error> for CliError {
    fn from(e: fibspec_core::Error) -> Self {
        use fibspec_core::Error as E;
        let msg = e.to_string();
        match e {
            E::Precondition(_) | E::InvalidInterval(_) | E::IntegerOverflow(_) | E::Overflow { .. } => {
                CliError::Precondition(msg)
            }
            E::NotFound(_) => CliError::NotFound(msg),
            E::NotSymmetric | E::NoConvergence | E::BandVerification { .. } | E::UnresolvedEdges { .. } => {
                CliError::Internal(msg)
            }
        }
    }
}
