//! Command line front end: argument parsing, configuration, manifests and
//! the subcommand pipelines.

mod args;
mod commands;
pub mod config;
pub mod error;
pub mod manifest;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command};
pub use config::load_config;
pub use error::CliError;
pub use manifest::RunManifest;

/// Runs the tool on a full argument vector (program name first) and returns
/// the process exit code: 0 on success, 1 for usage and validation errors,
/// 2 for filesystem errors.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> error::Result<()> {
    match command {
        Command::Prep(a) => commands::prep(a),
        Command::Train(a) => commands::train(a),
        Command::Debias(a) => commands::debias(a),
        Command::EvalCluster(a) => commands::eval_cluster(a),
        Command::EvalSembias(a) => commands::eval_sembias(a),
        Command::EvalWeat(a) => commands::eval_weat(a),
        Command::EvalNeighbors(a) => commands::eval_neighbors(a),
        Command::EvalProximity(a) => commands::eval_proximity(a),
        Command::ExportProjection(a) => commands::export_projection(a),
    }
}
