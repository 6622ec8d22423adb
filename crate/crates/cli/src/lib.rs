//! Command-line surface of the Potts solvers: argument parsing, file
//! formats and experiment drivers.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;

use std::io::Write;

use args::{Cli, Command};
use commands::Outcome;
use error::{CliResult, EXIT_NOT_CONVERGED, EXIT_SUCCESS};

/// Runs a parsed invocation; standard output goes to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<u8> {
    let outcome = match &cli.command {
        Command::Deblur(a) => commands::deblur(a)?,
        Command::Radon(a) => commands::radon(a)?,
        Command::Segment(a) => commands::segment(a)?,
        Command::Potts1d(a) => commands::potts1d(a, out)?,
    };
    Ok(match outcome {
        Outcome::Converged => EXIT_SUCCESS,
        Outcome::NotConverged => EXIT_NOT_CONVERGED,
    })
}
