mod args;
mod commands;
mod output;

use clap::error::ErrorKind;
use clap::Parser;
use pubrules::Error;
use std::process::ExitCode;

/// Overrides the worker thread count.
const THREADS_VAR: &str = "PUBRULES_THREADS";

const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let line = serde_json::json!({ "error": kind, "message": message.trim().trim_start_matches("error: ").replace('\n', " ") });
    eprintln!("{line}");
    ExitCode::from(code)
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Error::Numerical(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match args::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("validation", &e.render().to_string().lines().next().unwrap_or_default().to_string(), EXIT_VALIDATION),
    };
    let result = configure_threads()
        .and_then(|_| commands::run(&cli.command))
        .and_then(|out| output::render(out, cli.format))
        .and_then(|bytes| output::emit(&bytes, cli.out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is_validation() => fail("validation", &e.to_string(), EXIT_VALIDATION),
        Err(e) => fail("numerical", &e.to_string(), EXIT_NUMERICAL),
    }
}
