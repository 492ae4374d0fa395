use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use bellcond::commands::{cmd_analytic, cmd_simulate, cmd_sweep, sweep_csv, SweepAxis, SweepRange};
use bellcond::output::to_json;
use bellcond::{
    cmd_verify, write_output, CliError, OutputFormat, Overrides, RunSettings, VerifyOptions,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "bellcond",
    version,
    about = "Conditional and complete CHSH correlations"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `seed` from the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `trials`.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Overrides `workers`. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Read configured angles (and the b0-offset sweep range) as degrees.
    #[arg(long, global = true)]
    degrees: bool,
    /// Output path; `-` is standard output.
    #[arg(long, global = true)]
    output: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analytic correlation tables.
    Analytic,
    /// Monte Carlo estimates next to the analytic values.
    Simulate,
    /// C, c and c/C along one parameter axis.
    Sweep {
        #[arg(long, value_enum)]
        axis: SweepAxis,
        #[arg(long, allow_negative_numbers = true)]
        start: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        end: Option<f64>,
        #[arg(long, default_value_t = 11)]
        steps: usize,
    },
    /// Randomized identity suite.
    Verify {
        /// Feed a generator state scaled by 1.25 to every check.
        #[arg(long, hide = true)]
        inject_unnormalized_sigma: bool,
    },
}

fn init_logging() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("BELLCOND_LOG", "error"))
        .format_timestamp(None)
        .init();
}

fn settings(common: &Common) -> Result<RunSettings, CliError> {
    let overrides = Overrides {
        seed: common.seed,
        trials: common.trials,
        workers: common.workers,
        output: common.output.clone(),
        format: common.format,
        degrees: common.degrees,
    };
    let s = RunSettings::from_path(common.config.as_ref(), &overrides)?;
    log::debug!("resolved config: {:?}", s.echo);
    Ok(s)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let started = Instant::now();
    match cli.command {
        Command::Analytic | Command::Simulate => {
            let s = settings(&cli.common)?;
            let record = if matches!(cli.command, Command::Analytic) {
                cmd_analytic(&s)?
            } else {
                log::info!(
                    "simulating {} trials on {} worker(s)",
                    s.experiment.trials,
                    s.experiment.workers
                );
                cmd_simulate(&s)?
            };
            let text = match s.output.format {
                OutputFormat::Json => record.to_json(),
                OutputFormat::Csv => record.to_csv(),
            };
            write_output(&s.output.path, &text)?;
        }
        Command::Sweep {
            axis,
            start,
            end,
            steps,
        } => {
            let s = settings(&cli.common)?;
            let range = SweepRange::new(axis, start, end, steps, s.degrees)?;
            let rows = cmd_sweep(&s, &range)?;
            // sweeps default to CSV; only an explicit --format json changes that
            let text = match cli.common.format {
                Some(OutputFormat::Json) => to_json(&rows),
                _ => sweep_csv(&rows),
            };
            write_output(&s.output.path, &text)?;
        }
        Command::Verify {
            inject_unnormalized_sigma,
        } => {
            let report = cmd_verify(VerifyOptions {
                unnormalized_sigma: inject_unnormalized_sigma,
            });
            let text = match cli.common.format {
                Some(OutputFormat::Json) => to_json(&report),
                _ => report.render(),
            };
            write_output(cli.common.output.as_deref().unwrap_or("-"), &text)?;
            let failed = report.failures();
            if failed > 0 {
                return Err(CliError::Verify {
                    failed,
                    total: report.checks.len(),
                });
            }
        }
    }
    log::info!("finished in {:.3} s", started.elapsed().as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bellcond: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
