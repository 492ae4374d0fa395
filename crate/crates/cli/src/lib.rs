//! `bellcond` command-line front end: config ingestion, the `analytic`,
//! `simulate`, `sweep` and `verify` commands, and their JSON/CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

pub use commands::{cmd_analytic, cmd_simulate, cmd_sweep, sweep_csv, SweepAxis, SweepRange};
pub use config::{OutputFormat, Overrides, RunConfigFile, RunSettings};
pub use error::{CliError, Result};
pub use output::OutputRecord;
pub use verify::{cmd_verify, VerifyOptions, VerifyReport};

use std::io::Write;

/// Writes `text` to `path`, with `-` meaning standard output.
pub fn write_output(path: &str, text: &str) -> Result<()> {
    if path == "-" {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
    } else {
        std::fs::write(path, text)?;
    }
    Ok(())
}
