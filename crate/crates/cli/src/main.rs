//! `spinres` command-line front end.
//!
//! Exit codes: 0 success, 1 output I/O failure, 2 config error, 3 simulation
//! error, 4 analytic domain error.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{Analysis, CmdError};
use config::{ConfigError, Normalize, RunConfig};

#[derive(Parser)]
#[command(name = "spinres", version, about = "Driven two-level spin simulator and analytic predictions")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Worker threads for spectra (default: all cores). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Rows,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory; writes a trajectory CSV and prints the observable.
    Evolve,
    /// Phase-averaged spectrum over the (ω_RF, δ) grid.
    Spectrum {
        /// Divide every ω_RF row by its mean before writing.
        #[arg(long, value_enum)]
        normalize: Option<NormalizeArg>,
    },
    /// Analytic predictions as CSV on standard output.
    Analyze {
        #[arg(value_enum)]
        which: Analysis,
    },
    /// Print every config key with its default value and meaning.
    Defaults,
}

fn run(cli: Cli) -> Result<(), CmdError> {
    if let Command::Defaults = cli.command {
        print!("{}", RunConfig::default().documented());
        return Ok(());
    }
    let path = cli.config.ok_or_else(|| {
        CmdError::Config(ConfigError { line: None, message: "no config given (use --config <path>)".into() })
    })?;
    let mut cfg = RunConfig::load(&path)?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CmdError::Output(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Evolve => {
            let value = commands::evolve(&cfg, &cli.out)?;
            println!("observable = {value:.6}");
        }
        Command::Spectrum { normalize } => {
            if let Some(NormalizeArg::Rows) = normalize {
                cfg.normalize = Normalize::Rows;
            }
            let written = commands::spectrum(&cfg, &cli.out)?;
            println!("wrote {}", written.display());
        }
        Command::Analyze { which } => commands::analyze(&cfg, which, std::io::stdout().lock())?,
        Command::Defaults => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spinres: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
