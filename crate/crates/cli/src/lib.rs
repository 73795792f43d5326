//! Configuration, verb dispatch and artifact writing for the `anyonvlasov`
//! command.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

pub use run::{execute, Verb};

/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for failures while running a verb.
pub const EXIT_RUNTIME: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] anyonvlasov::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            _ => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "anyonvlasov", version, about = "Semiclassical anyon gas experiments")]
pub struct Cli {
    pub verb: Verb,
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed, overriding `seed` in the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, overriding `out` in the configuration.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dotted `key=value` overrides applied after the file is read.
    pub overrides: Vec<String>,
}

/// Threads for the global pool, from `ANYONVLASOV_THREADS` when set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("ANYONVLASOV_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .parse()
        .map_err(|_| CliError::Usage(format!("ANYONVLASOV_THREADS must be a positive integer, got `{raw}`")))?;
    if threads == 0 {
        return Err(CliError::Usage("ANYONVLASOV_THREADS must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

pub fn main_with(cli: Cli) -> Result<PathBuf, CliError> {
    configure_threads()?;
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.out = out;
    }
    let out = execute(cli.verb, &cfg)?;
    Ok(out.root().to_path_buf())
}
