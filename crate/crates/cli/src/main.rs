//! Command-line front end: run the bundled numerical experiments and emit
//! CSV/JSON reports.

mod config;
mod experiments;
mod output;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bergman-toeplitz",
    about = "Toeplitz operators with singular symbols on the half-plane Bergman space",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the bundled experiments.
    List {
        /// Filter by section ("2", "3", "4", "6").
        #[arg(long)]
        section: Option<String>,
    },
    /// Run one experiment by name or from a JSON config file.
    Run {
        /// Experiment name (see `list`) or a path to a config document.
        target: String,
        /// Output directory (default `out/<experiment>/`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Basis truncation sizes, comma separated (e.g. `20,40,80`).
        #[arg(long, value_delimiter = ',')]
        basis_sizes: Option<Vec<usize>>,
        /// Seed for the randomized property checks.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List { section } => {
            for e in experiments::registry() {
                if let Some(s) = &section {
                    if e.section != s {
                        continue;
                    }
                }
                println!("{:<24} [section {}] {}", e.name, e.section, e.anchor);
            }
            ExitCode::SUCCESS
        }
        Command::Run {
            target,
            out,
            basis_sizes,
            seed,
        } => match run_target(&target, out, basis_sizes, seed) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
        },
    }
}

fn run_target(
    target: &str,
    out: Option<PathBuf>,
    basis_sizes: Option<Vec<usize>>,
    seed: Option<u64>,
) -> Result<bool, String> {
    let mut cfg = if target.ends_with(".json") || std::path::Path::new(target).is_file() {
        ExperimentConfig::from_file(std::path::Path::new(target))?
    } else {
        ExperimentConfig::defaults_for(target)
    };
    if let Some(sizes) = basis_sizes {
        cfg.basis_sizes = Some(sizes);
    }
    if let Some(s) = seed {
        cfg.seed = Some(s);
    }
    if let Some(dir) = out {
        cfg.out_dir = Some(dir);
    }
    cfg.validate()?;

    let info = experiments::registry()
        .into_iter()
        .find(|e| e.name == cfg.experiment)
        .ok_or_else(|| format!("unknown experiment `{}` (see `list`)", cfg.experiment))?;

    let outcome = experiments::run(&cfg)?;
    let dir = cfg
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.experiment));
    output::write_reports(&dir, &info, &outcome, cfg.seed.unwrap_or(0))
        .map_err(|e| format!("writing reports to {}: {e}", dir.display()))?;

    println!(
        "{}: {} — reports in {}",
        info.name,
        if outcome.verdict { "PASS" } else { "FAIL" },
        dir.display()
    );
    Ok(outcome.verdict)
}
