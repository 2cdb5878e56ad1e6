use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use nsp_cli::{run, Experiment, Invocation};

/// Decay, stability and inequality experiments for the compressible
/// Navier-Stokes-Poisson system.
#[derive(Debug, Parser)]
#[command(name = "nsp", version)]
struct Args {
    experiment: Experiment,
    /// TOML config, or the manifest.json of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Dotted config key, e.g. `params.mu=0.5` or `s_list=[0.5, 1.0]`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let inv = Invocation {
        experiment: args.experiment,
        config: args.config,
        out: args.out,
        seed: args.seed,
        overrides: args.overrides,
    };
    match run(&inv) {
        Ok(summary) => {
            println!("{}: outputs in {}", inv.experiment.name(), summary.out_dir.display());
            if summary.all_pass {
                println!("all verdicts pass");
                ExitCode::SUCCESS
            } else {
                println!("failed: {}", summary.failed.join(", "));
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(p) = e.checkpoint() {
                eprintln!("checkpoint: {}", p.display());
            }
            ExitCode::from(2)
        }
    }
}
