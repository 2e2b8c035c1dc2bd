use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rdars_bench::{emit_csv, parse_config, run_experiment, Profile};

#[derive(Parser)]
#[command(name = "rdars-bench", about = "Monte-Carlo benchmark runner for RDARS sum-MSE optimizers", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config and write a CSV.
    Run {
        /// Path to the experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Override the number of trials per sweep value.
        #[arg(long)]
        trials: Option<u64>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scale profile: desk (N=64, 50 trials) or paper (N=256, 300 trials).
        #[arg(long, value_enum)]
        profile: Option<Profile>,
    },
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            trials,
            seed,
            out,
            profile,
        } => {
            let mut cfg = parse_config(&config)?;
            if let Some(p) = profile {
                cfg.apply_profile(p);
            }
            if let Some(t) = trials {
                if t == 0 {
                    anyhow::bail!("--trials must be >= 1");
                }
                cfg.trials = t;
            }
            if let Some(s) = seed {
                cfg.base_seed = s;
            }
            if let Some(o) = out {
                cfg.output_path = o;
            }
            let records = run_experiment(&cfg)?;
            emit_csv(&records, &cfg.output_path)?;
            eprintln!(
                "wrote {} records to {}",
                records.len(),
                cfg.output_path.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // Single machine-readable error line.
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
