//! `tomo`: forward tables, stability batches, posterior sampling and the rate experiment.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use tomo_cli::{commands, config, CliError};

#[derive(Parser, Debug)]
#[command(name = "tomo", version, about = "Travel-time tomography for conformal metrics on the unit disk")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; overrides `threads`.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; overrides `master_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Certify the field and write its distance table.
    Forward,
    /// Stability inequalities on pairs of prior draws.
    Stability,
    /// Sample a dataset from the field and run a pCN chain.
    Invert,
    /// Posterior contraction experiment.
    Rate,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = config::RunConfig::load(&path)?;
    if cli.seed.is_some() {
        cfg.master_seed = cli.seed;
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.out.is_some() {
        cfg.output_dir = cli.out;
    }
    cfg.validate()?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }
    let out = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    match cli.command {
        Command::Forward => commands::forward(&cfg, &out),
        Command::Stability => commands::stability(&cfg, &out),
        Command::Invert => commands::invert(&cfg, &out),
        Command::Rate => commands::rate(&cfg, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tomo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
