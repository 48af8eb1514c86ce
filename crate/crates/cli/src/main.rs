//! `fdlab`: experiments for the fast diffusion toolkit.
//!
//! Exit codes: 0 on success, 2 for bad input or configuration, 3 when a
//! computation fails.

mod config;
mod evolve;
mod fail;
mod params;
mod profile;
mod sweep;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::ParamsInput;
use crate::fail::{input, CliResult};

#[derive(Parser)]
#[command(name = "fdlab", version, about = "Self-similar profiles and rescaled evolution for u_t = Δu^m")]
struct Cli {
    /// JSON configuration for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print derived constants and the regime for (n, m, beta) as JSON.
    #[command(allow_negative_numbers = true)]
    Params { n: Option<u32>, m: Option<f64>, beta: Option<f64> },
    /// Solve profiles, fit their tails and compare a family of them.
    Profile,
    /// Run the rescaled evolution and its diagnostics.
    Evolve,
    /// Regime table or a batch of profile/evolve runs.
    Sweep,
}

fn load<T: serde::de::DeserializeOwned>(path: Option<&Path>, what: &str) -> CliResult<T> {
    let path = path.ok_or_else(|| input(format!("{what} needs --config <path>")))?;
    config::parse(config::read(path)?, what)
}

fn print<T: Serialize>(v: &T) -> CliResult<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| input(e.to_string()))?;
    println!("{s}");
    Ok(())
}

fn run(cli: &Cli) -> CliResult<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(input("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(|e| input(e.to_string()))?;
    }
    let cfg = cli.config.as_deref();
    match &cli.command {
        Command::Params { n, m, beta } => {
            let p = match (n, m, beta, cfg) {
                (Some(n), Some(m), Some(beta), None) => ParamsInput { n: *n, m: *m, beta: *beta },
                (None, None, None, Some(_)) => load(cfg, "params")?,
                _ => return Err(input("params takes either <n> <m> <beta> or --config <path>")),
            };
            print(&params::run(&p)?)
        }
        Command::Profile => print(&profile::run(&load(cfg, "profile")?, &cli.out)?),
        Command::Evolve => print(&evolve::run(&load(cfg, "evolve")?, &cli.out)?),
        Command::Sweep => print(&sweep::run(&load(cfg, "sweep")?, &cli.out)?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdlab: {e}");
            ExitCode::from(e.code)
        }
    }
}
