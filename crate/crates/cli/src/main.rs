mod args;
mod commands;
mod error;
mod input;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

fn configure_threads() -> Result<(), error::CliError> {
    let Ok(v) = std::env::var("AFFINE_SPECTRA_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| error::CliError::Usage(format!("AFFINE_SPECTRA_THREADS must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(error::CliError::Usage("AFFINE_SPECTRA_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| error::CliError::Io(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| commands::run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
