//! The `mteval` command line and the rating service it hosts.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure, 64 usage error.

pub mod args;
pub mod commands;
pub mod error;
pub mod service;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
pub use error::{CliError, EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Score(a) => commands::score(a, stdout),
        Command::Correlate(a) => commands::correlate(a, stdout),
        Command::Tokenize(a) => commands::tokenize(a, stdout),
        Command::Stem(a) => commands::stem(a, stdout),
        Command::Serve(a) => commands::serve(a, stderr),
        Command::ExportReport(a) => commands::export_report(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
