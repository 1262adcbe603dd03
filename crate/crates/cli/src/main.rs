mod args;
mod commands;
mod error;
mod figures;
mod grid;
mod source;
mod table;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Format};
use commands::Job;
use error::{CliError, CliResult, Failure};

fn run(cli: Cli) -> CliResult<()> {
    let flags = cli.flags.layered()?;
    if let Some(threads) = flags.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::new(Failure::Runtime, e.to_string()))?;
    }
    let table = Job::new(cli.command, &flags)?.run()?;
    let text = match flags.format.unwrap_or_default() {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    };
    match &flags.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::new(Failure::Runtime, format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("{}", CliError::parse(first).diagnostic());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.diagnostic());
            ExitCode::from(e.failure.exit_code() as u8)
        }
    }
}
