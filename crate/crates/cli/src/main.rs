//! Command-line front end: reproducible experiments in, datasets and
//! static plots out.

mod config;
mod plot;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "ising-ring",
    version,
    about = "Quench dynamics, bubble nucleation, and open-system relaxation on a ferromagnetic quantum Ising ring",
    long_about = "Runs reproducible simulations from strict JSON configs and renders their \
                  artifacts as static SVG.\n\nOutput root: $ISING_RING_OUT (default ./runs) when a \
                  config gives no output-dir.\nExit codes: 2 for config errors, 3 for numerical \
                  failures."
)]
struct Cli {
    /// Number of worker threads (defaults to the core count).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        /// Path to the run configuration.
        config: PathBuf,
        /// Escalate resolution/fidelity warnings to errors.
        #[arg(long)]
        strict: bool,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render the artifacts of a run directory to SVG.
    Plot {
        /// Artifact directory produced by `run`.
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Run {
            config,
            strict,
            seed,
        } => run_command(&config, strict, seed),
        Command::Plot { dir } => plot_command(&dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run_command(path: &PathBuf, strict: bool, seed: Option<u64>) -> Result<(), runner::CliError> {
    let mut config = runner::load_config(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let outcome = runner::run(&config, strict)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", outcome.dir.display());
    Ok(())
}

fn plot_command(dir: &PathBuf) -> Result<(), runner::CliError> {
    let produced = runner::plot(dir)?;
    for p in produced {
        println!("{}", p.display());
    }
    Ok(())
}
