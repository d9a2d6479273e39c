//! `tcg`: derive time-coarse-grained effective models, simulate them, compare runs.

mod commands;

use std::process::ExitCode;

use clap::Parser;

use commands::{Cli, CliError};

const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

fn configure_workers() -> Result<(), CliError> {
    let Ok(text) = std::env::var("TCG_WORKERS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("TCG_WORKERS: expected a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("TCG_WORKERS: {e}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match configure_workers().and_then(|_| commands::run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Core(ref c) if c.is_numerical() => EXIT_NUMERICAL,
                CliError::Core(_) => EXIT_VALIDATION,
            })
        }
    }
}
