//! Config-driven experiment runner over `dlab-core`.
//!
//! Each subcommand reads one flat JSON config, writes CSV/JSON artifacts
//! into the output directory and records them in `manifest.json`. Every
//! artifact starts with the resolved config, so a rerun with the same file
//! and seed reproduces it byte for byte.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{ExperimentConfig, RawConfig};
pub use error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Coherence,
    Darwinism,
    Cmi,
    Compare,
    Route,
    Tomo,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Coherence => "coherence",
            Command::Darwinism => "darwinism",
            Command::Cmi => "cmi",
            Command::Compare => "compare",
            Command::Route => "route",
            Command::Tomo => "tomo",
        }
    }
}

/// Runs `command` and returns the artifact names it wrote.
pub fn run(command: Command, cfg: &ExperimentConfig) -> CliResult<Vec<String>> {
    let mut out = output::RunOutput::new(command.name(), cfg)?;
    match command {
        Command::Coherence => commands::coherence(cfg, &mut out)?,
        Command::Darwinism => commands::darwinism(cfg, &mut out)?,
        Command::Cmi => commands::cmi(cfg, &mut out)?,
        Command::Compare => commands::compare(cfg, &mut out)?,
        Command::Route => commands::route(cfg, &mut out)?,
        Command::Tomo => commands::tomo(cfg, &mut out)?,
    }
    out.finish()
}

/// Same as [`run`] on a pool of `jobs` worker threads (`None`: rayon's
/// default). Results do not depend on the pool size.
pub fn run_with_jobs(command: Command, cfg: &ExperimentConfig, jobs: Option<usize>) -> CliResult<Vec<String>> {
    match jobs {
        None => run(command, cfg),
        Some(0) => Err(CliError::Config("--jobs must be at least 1".into())),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(|| run(command, cfg)),
    }
}
