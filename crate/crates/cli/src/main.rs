use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use ssfinsler_cli::{destination, run, Cli, CliError};

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match destination(cli) {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::io("write", format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("write", e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|outcome| {
        emit(&cli, &outcome.output)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
