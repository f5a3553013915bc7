//! Command-line front end for exponentiated hypoexponential models.
//!
//! Exit codes: 0 success, 1 usage or configuration, 2 data ingestion,
//! 3 numeric or fit failure. A fit that does not converge still writes its
//! report before exiting with 3.

pub mod args;
pub mod commands;
pub mod config;
mod error;
pub mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use args::{Args, Command, Format};
pub use config::{Grid, ModelSpec, RunConfig, Task};
pub use error::CliError;

use commands::Emission;

pub fn execute(cfg: &RunConfig) -> Result<Emission, CliError> {
    match &cfg.task {
        Task::Eval { params, grid } => Ok(commands::eval(params, grid, cfg.format)),
        Task::Sample { params, count } => commands::sample(params, *count, cfg.seed, cfg.format),
        Task::Fit { model, data } => commands::fit_command(*model, data, cfg.seed, cfg.format),
        Task::Compare { models, data } => commands::compare(models, data, cfg.seed, cfg.format),
        Task::Plotdata { model, data, grid } => commands::plotdata(*model, data, *grid, cfg.seed, cfg.format),
    }
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output {
            path: path.display().to_string(),
            message: e.to_string(),
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Output {
            path: "stdout".into(),
            message: e.to_string(),
        }),
    }
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
                1
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
                0
            };
        }
    };
    let outcome = RunConfig::from_args(&args).and_then(|cfg| {
        let emission = execute(&cfg)?;
        emit(&cfg, &emission.text, stdout)?;
        emission.failure.map_or(Ok(()), Err)
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
