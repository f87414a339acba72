use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use prony_lab::{run_experiment, write_outputs, CliError, ExperimentConfig, TaskKind};

/// Moment-based reconstruction experiments.
#[derive(Debug, Parser)]
#[command(name = "prony-lab", version)]
struct Args {
    task: TaskKind,
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the configured one, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run trials on one thread.
    #[arg(long)]
    serial: bool,
}

fn run(args: &Args) -> Result<u8, CliError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if args.seed.is_some() {
        cfg.seed = args.seed;
    }
    if args.out.is_some() {
        cfg.output = args.out.clone();
    }
    cfg.serial |= args.serial;
    let out = run_experiment(&cfg, args.task)?;
    let dir = cfg.output.clone().unwrap_or_else(|| PathBuf::from("."));
    for path in write_outputs(&out, &dir)? {
        println!("{}", path.display());
    }
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
