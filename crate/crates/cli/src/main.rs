mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use num_complex::Complex64;

use commands::{Command, Failure};
use config::{ConfigError, Mode};
use padic_frames::CycloNumber;

/// Exact p-adic wavelet frame analyses driven by a JSON config.
#[derive(Debug, Parser)]
#[command(name = "padic-frames", version)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, value_enum)]
    command: Command,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_max: Option<i64>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    random_g: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load(args: &Args) -> Result<config::RunConfig, ConfigError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| ConfigError(format!("config {}: {e}", args.config.display())))?;
    let mut cfg = config::parse(&text)?;
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.gamma_min {
        cfg.gamma_min = v;
    }
    if let Some(v) = args.gamma_max {
        cfg.gamma_max = v;
    }
    if let Some(v) = args.depth {
        cfg.depth = Some(v);
    }
    if let Some(v) = args.random_g {
        cfg.random_g = v;
    }
    if let Some(v) = args.mode {
        cfg.mode = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = match load(&args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cfg.mode {
        Mode::Exact => commands::run::<CycloNumber>(&cfg, args.command),
        Mode::Float => commands::run::<Complex64>(&cfg, args.command),
    };
    let report = match result {
        Ok(report) => report,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(Failure::Analysis(msg)) => {
            eprintln!("analysis failed: {msg}");
            return ExitCode::from(1);
        }
    };
    let text = serde_json::to_string_pretty(&report.body).expect("report serializes") + "\n";
    match &args.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
