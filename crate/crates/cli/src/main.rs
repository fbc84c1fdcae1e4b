//! `momad`: run closed-loop simulations, replay logs, curate datasets and
//! compare planners.
//!
//! Exit codes: 0 ok, 2 configuration, 3 I/O, 4 corrupt data.
//! Log verbosity comes from `MOMAD_LOG_LEVEL` (error, warn, info, debug).

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ProtocolArg, SimArgs};
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "momad", version, about = "Momentum-aware trajectory selection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate every seed; write one log and one metrics CSV per seed.
    Run(SimArgs),
    /// Recompute metrics from logs and print them as CSV.
    Eval {
        #[arg(required = true)]
        logs: Vec<PathBuf>,
        /// Defaults to the protocol recorded in each log.
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Keep every sample of scenes that contain a turning sample.
    Curate {
        input: PathBuf,
        /// Lateral-displacement threshold in metres.
        #[arg(long, default_value_t = commands::DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one-shot and momentum planners on the same seeds.
    Compare(SimArgs),
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => commands::run(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Eval { logs, protocol, out } => {
            let csv = commands::eval(&logs, protocol.map(Into::into), out.as_deref())?;
            let path = PathBuf::from("<stdout>");
            std::io::stdout().write_all(csv.as_bytes()).map_err(CliError::io(&path))
        }
        Command::Curate { input, epsilon, out } => commands::curate_cmd(&input, epsilon, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("MOMAD_LOG_LEVEL", "warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::debug!("{e:?}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
