//! Command-line front end: scenario files in, CSV tables and SVG plots out.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod output;
mod presets;
mod scenario;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use commands::Run;
use scenario::{CommandKind, LoadedScenario};

#[derive(Parser)]
#[command(name = "rabi-rigidity", version, about = "Ensemble Rabi oscillations and frequency rigidity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory; defaults to the scenario's `output.dir`, else the working directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write SVG plots
    #[arg(long, global = true)]
    svg: bool,
    /// Override the scenario's RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Ensemble signal S(t) for each configuration
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit the ensemble signal across detunings
    Scan {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fourier spectra (and optional sliding-window frequency track)
    Spectrum {
        #[arg(long)]
        config: PathBuf,
    },
    /// Histogram of the field magnitude over the probed volume
    FieldDist {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a shipped preset
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
        preset: String,
        /// Print the preset's scenario file instead of running it
        #[arg(long)]
        print: bool,
    },
}

fn execute(kind: CommandKind, loaded: LoadedScenario, cli: &Cli) -> Result<Vec<PathBuf>> {
    let run = Run {
        out_dir: commands::output_dir(cli.out.as_deref(), &loaded),
        svg: cli.svg || loaded.scenario.output.svg,
        seed: cli.seed.unwrap_or(loaded.scenario.seed),
        loaded,
    };
    match kind {
        CommandKind::Simulate => commands::simulate(&run),
        CommandKind::Scan => commands::scan(&run),
        CommandKind::Spectrum => commands::spectrum(&run),
        CommandKind::FieldDist => commands::field_dist(&run),
    }
    .with_context(|| format!("{} failed", kind.name()))
}

fn from_file(kind: CommandKind, config: &Path, cli: &Cli) -> Result<Vec<PathBuf>> {
    execute(kind, LoadedScenario::from_file(config)?, cli)
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(anyhow!("--threads: must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    match &cli.command {
        Command::Simulate { config } => from_file(CommandKind::Simulate, config, cli),
        Command::Scan { config } => from_file(CommandKind::Scan, config, cli),
        Command::Spectrum { config } => from_file(CommandKind::Spectrum, config, cli),
        Command::FieldDist { config } => from_file(CommandKind::FieldDist, config, cli),
        Command::Reproduce { preset, print } => {
            let text = presets::get(preset).ok_or_else(|| anyhow!("unknown preset `{preset}`"))?;
            if *print {
                print!("{text}");
                return Ok(Vec::new());
            }
            let loaded = LoadedScenario::parse(text, PathBuf::from("."))
                .with_context(|| format!("in preset {preset}"))?;
            let kind = loaded
                .scenario
                .command
                .ok_or_else(|| anyhow!("preset {preset}: `command` is missing"))?;
            execute(kind, loaded, cli)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
