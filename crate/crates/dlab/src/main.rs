use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dlab::{run_with_jobs, Command, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "dlab", version, about = "Collision-model and quantum Darwinism experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Experiment config (flat JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding the config's `outputs`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed, overriding the config's `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Cmd {
    /// Coherence factor against time.
    Coherence,
    /// Averaged mutual information curves.
    Darwinism,
    /// Classical mutual information over measurement bases.
    Cmi,
    /// QMI, Holevo quantity and best-basis CMI per fraction size.
    Compare,
    /// Placement search, SWAP routing and equivalence checks.
    Route,
    /// Sampled Pauli tomography of the global state.
    Tomo,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Coherence => Command::Coherence,
            Cmd::Darwinism => Command::Darwinism,
            Cmd::Cmi => Command::Cmi,
            Cmd::Compare => Command::Compare,
            Cmd::Route => Command::Route,
            Cmd::Tomo => Command::Tomo,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(path) = cli.config else {
        eprintln!("error: --config <file> is required");
        return ExitCode::from(2);
    };
    let result = ExperimentConfig::load(&path).and_then(|mut cfg| {
        if let Some(out) = cli.out {
            cfg.outputs = out;
        }
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        run_with_jobs(cli.command.into(), &cfg, cli.jobs).map(|files| (cfg, files))
    });
    match result {
        Ok((cfg, files)) => {
            println!("wrote {} artifacts to {}", files.len(), cfg.outputs.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
