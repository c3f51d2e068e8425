//! Command-line front end: run experiments, validate configs, generate
//! synthetic datasets, and pretty-print persisted reports.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use fraudbench::config::validate_config;
use fraudbench::dataset::{make_synthetic, write_csv};
use fraudbench::pipeline::run_pipeline;
use fraudbench::report::RunReport;

#[derive(Parser)]
#[command(
    name = "fraudbench",
    version,
    about = "Imbalanced-classification experiments: under-sampling, k-NN, and a dense net"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full experiment pipeline described by a config file.
    Run {
        /// Path to the TOML experiment config.
        config: PathBuf,
    },
    /// Parse a config file and echo the fully resolved configuration.
    Validate {
        /// Path to the TOML experiment config.
        config: PathBuf,
    },
    /// Generate a synthetic two-cluster dataset CSV.
    Synth {
        /// Majority-class (label 0) row count.
        #[arg(long)]
        majority: usize,
        /// Minority-class (label 1) row count.
        #[arg(long)]
        minority: usize,
        /// Feature dimensions.
        #[arg(long, default_value_t = 2)]
        dims: usize,
        /// Euclidean distance between the cluster means.
        #[arg(long, default_value_t = 3.0)]
        separation: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Pretty-print the report persisted in a run's output directory.
    Report {
        /// Output directory of a previous run.
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Run { config } => {
            let cfg = validate_config(&config)
                .with_context(|| format!("invalid config {}", config.display()))?;
            let (report, timings) = run_pipeline(&cfg)?;
            print!("{}", report.render_text());
            println!();
            println!(
                "artifacts written to {} ({} ms total)",
                cfg.output_dir.display(),
                timings.total_ms
            );
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = validate_config(&config)
                .with_context(|| format!("invalid config {}", config.display()))?;
            print!("{}", cfg.to_toml());
            Ok(())
        }
        Command::Synth {
            majority,
            minority,
            dims,
            separation,
            seed,
            out,
        } => {
            let data = make_synthetic(majority, minority, dims, separation, seed)?;
            write_csv(&data, &out)?;
            println!(
                "wrote {} rows ({majority} majority / {minority} minority, {dims}-d, separation {separation}) to {}",
                majority + minority,
                out.display()
            );
            Ok(())
        }
        Command::Report { dir } => {
            let report = RunReport::from_json_file(&dir.join("report.json"))?;
            print!("{}", report.render_text());
            if dir.join("INCOMPLETE").exists() {
                println!();
                println!("warning: INCOMPLETE marker present; this run did not finish");
            }
            Ok(())
        }
    }
}
