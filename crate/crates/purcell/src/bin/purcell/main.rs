//! Command-line front end: model evaluation, optimization, design sweeps and
//! figure-data reproduction.

mod commands;
mod config;
mod output;
mod reproduce;

use clap::{Parser, Subcommand};
use std::process::ExitCode;

use purcell::Error;

#[derive(Parser)]
#[command(
    name = "purcell",
    version,
    about = "Purcell-enhanced photon extraction: simulate, optimize, design",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the single-excitation amplitudes and write a trajectory CSV
    Evolve(commands::EvolveArgs),
    /// Compute an emission budget (JSON)
    Efficiency(commands::EfficiencyArgs),
    /// Maximize extraction efficiency or windowed cavity population (JSON)
    Optimize(commands::OptimizeArgs),
    /// Sweep cavity length against birefringence (CSV), or locate the
    /// longest cavity meeting --eta-target (JSON)
    Design(commands::DesignArgs),
    /// Regenerate the data behind a bundled figure panel (CSV)
    Reproduce(reproduce::ReproduceArgs),
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::DegenerateRates(_) | Error::NoDecayChannel => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            if n >= 1 {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok();
            }
        }
    }
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Evolve(args) => commands::cmd_evolve(args),
        Cmd::Efficiency(args) => commands::cmd_efficiency(args),
        Cmd::Optimize(args) => commands::cmd_optimize(args),
        Cmd::Design(args) => commands::cmd_design(args),
        Cmd::Reproduce(args) => reproduce::cmd_reproduce(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
