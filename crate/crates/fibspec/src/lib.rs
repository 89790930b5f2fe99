//! Multiprecision backend, file formats and the `fibspec` command line
//! for [`fibspec_core`].

pub mod cli;
pub mod error;
pub mod format;
pub mod mp;
pub mod run;
pub mod sweep;

pub use cli::Cli;
pub use error::CliError;
pub use mp::Mpf;
