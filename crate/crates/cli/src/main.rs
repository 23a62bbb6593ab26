mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use magberezin::strictq::Axiom;

use commands::Quantization;
use config::ExperimentConfig;
use output::{Format, Sink};

/// Magnetic Weyl and Berezin quantization experiments.
///
/// Exit status: 0 when every verdict passes, 1 when a verdict fails,
/// 2 on configuration or runtime errors.
#[derive(Parser, Debug)]
#[command(name = "magq", version)]
struct Cli {
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Comma-separated hbar values; overrides `hbar_list`.
    #[arg(long, global = true, value_delimiter = ',', value_name = "x,y,z")]
    hbar: Option<Vec<f64>>,
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value = "both")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Checks of the vector potential against the field.
    Fields {
        #[command(subcommand)]
        action: FieldsAction,
    },
    /// Builds an operator, dumps it and reports norm, trace and positivity.
    Quantize {
        #[arg(value_enum)]
        which: Quantization,
    },
    /// Husimi density of a state as CSV.
    Husimi,
    /// Bargmann-space identities.
    Bargmann {
        #[command(subcommand)]
        action: BargmannAction,
    },
    /// Sweeps over the hbar list.
    Sweep {
        #[arg(value_parser = parse_axiom)]
        axiom: Axiom,
    },
    /// Eigenvalues of a quantized symbol.
    Spectrum {
        #[arg(value_enum, default_value = "weyl")]
        which: Quantization,
    },
}

#[derive(Subcommand, Debug)]
enum FieldsAction {
    Verify,
}

#[derive(Subcommand, Debug)]
enum BargmannAction {
    Check,
}

fn parse_axiom(s: &str) -> std::result::Result<Axiom, String> {
    Axiom::parse(s).map_err(|e| e.to_string())
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

fn config_error(err: anyhow::Error) -> Failure {
    Failure { code: 2, err }
}

fn run(cli: Cli) -> std::result::Result<bool, Failure> {
    let path = cli.config.clone().context("--config is required").map_err(config_error)?;
    let mut cfg = ExperimentConfig::load(&path).map_err(config_error)?;
    let explicit_hbar = cli.hbar.is_some() || cfg.hbar_list.is_some();
    if let Some(h) = cli.hbar.clone() {
        cfg.hbar_list = Some(h);
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = Some(o.display().to_string());
    }
    let out_dir = PathBuf::from(cfg.out_dir.clone().unwrap_or_else(|| "out".into()));
    let resolved = cfg.resolve().map_err(config_error)?;
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")
            .map_err(config_error)?;
    }
    let mut sink = Sink::new(&out_dir, cli.format).map_err(config_error)?;
    let result: Result<bool> = match cli.command {
        Command::Fields { action: FieldsAction::Verify } => commands::fields_verify(&resolved, &mut sink),
        Command::Quantize { which } => commands::quantize(&resolved, which, &mut sink),
        Command::Husimi => commands::husimi(&resolved, &mut sink),
        Command::Bargmann { action: BargmannAction::Check } => commands::bargmann(&resolved, &mut sink),
        Command::Sweep { axiom } => commands::sweep(&resolved, axiom, explicit_hbar, &mut sink),
        Command::Spectrum { which } => commands::spectrum(&resolved, which, &mut sink),
    };
    let pass = result.map_err(|err| Failure { code: 2, err })?;
    for p in sink.written() {
        println!("wrote {}", p.display());
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verdict: FAIL");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}
