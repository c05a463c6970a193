use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qbm_cli::{configure_threads, parse_config_with, run, RunError};

/// Run a particle + bath structure experiment described by a scenario file.
#[derive(Debug, Parser)]
#[command(name = "qbm-structures", version)]
struct Args {
    /// Scenario file (TOML).
    config: PathBuf,
    /// Override `run.scenario`.
    #[arg(long)]
    scenario: Option<String>,
    /// Override `run.output` ("-" for standard output).
    #[arg(long)]
    output: Option<String>,
    /// Override `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Override any key, as `section.key=value`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), RunError> {
    configure_threads()?;
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunError::Io(format!("{}: {e}", args.config.display())))?;
    let mut overrides = args.set.clone();
    if let Some(s) = &args.scenario {
        overrides.push(format!("run.scenario=\"{s}\""));
    }
    if let Some(o) = &args.output {
        overrides.push(format!("run.output=\"{o}\""));
    }
    if let Some(seed) = args.seed {
        overrides.push(format!("run.seed={seed}"));
    }
    let cfg = parse_config_with(&text, &overrides)?;
    run(&cfg)
}
