mod config;
mod dump;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

/// DG discrete-ordinates transport with SIAC post-processing.
#[derive(Parser)]
#[command(name = "dgsiac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set degree=2`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve each configured mesh and dump the scalar density.
    Solve(ConfigArgs),
    /// Run a convergence study on a manufactured problem.
    Study(ConfigArgs),
    /// SIAC-filter a density dump.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Print the symmetric SIAC kernel for degree `k`.
    KernelInfo {
        #[arg(long)]
        k: usize,
        /// Kernel scaling (mesh size).
        #[arg(long, default_value_t = 1.0)]
        h: f64,
        /// Fourier transform samples on `[0, pi]`.
        #[arg(long, default_value_t = 9)]
        samples: usize,
    },
}

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("DGSIAC_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| config::ConfigError(format!("DGSIAC_THREADS: not a thread count: {v:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    init_threads()?;
    let out = match cli.command {
        Command::Solve(a) => run::solve(&config::load(a.config.as_deref(), &a.overrides)?)?,
        Command::Study(a) => run::study(&config::load(a.config.as_deref(), &a.overrides)?)?,
        Command::Filter { input, output } => {
            let n = dump::filter_dump(&input, &output)?;
            format!("wrote {n} filtered points to {}\n", output.display())
        }
        Command::KernelInfo { k, h, samples } => run::kernel_info(k, h, samples)?,
    };
    print!("{out}");
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let stalled = err.chain().any(|e| {
        matches!(e.downcast_ref::<dgsiac_core::Error>(), Some(dgsiac_core::Error::NotConverged { .. }))
            || e.is::<run::StudyNotConverged>()
    });
    if stalled {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
