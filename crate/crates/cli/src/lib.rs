//! File formats, parallel experiment drivers and the command-line front end
//! for `multistep-core`.

pub mod cli;
pub mod error;
pub mod experiment;
pub mod io;
pub mod report;

pub use error::CliError;
