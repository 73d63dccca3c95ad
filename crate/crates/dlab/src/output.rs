//! Artifact writing and the per-directory run manifest.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliResult;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// One entry per subcommand run into this directory.
    pub runs: BTreeMap<String, RunEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunEntry {
    pub config: serde_json::Value,
    pub artifacts: Vec<String>,
}

/// Collects the files one subcommand writes under `dir`.
pub struct RunOutput {
    dir: PathBuf,
    command: String,
    config_json: String,
    artifacts: Vec<String>,
}

#[derive(Serialize)]
struct Wrapped<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    result: &'a T,
}

impl RunOutput {
    pub fn new(command: &str, cfg: &ExperimentConfig) -> CliResult<Self> {
        fs::create_dir_all(&cfg.outputs)?;
        Ok(Self {
            dir: cfg.outputs.clone(),
            command: command.to_string(),
            config_json: cfg.to_json(),
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn header(&self) -> String {
        format!("# config: {}\n", self.config_json)
    }

    /// Text artifact with the config comment on its first line.
    pub fn write_text(&mut self, name: &str, body: &str) -> CliResult<()> {
        fs::write(self.dir.join(name), self.header() + body)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, cfg: &ExperimentConfig, value: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(&Wrapped { config: cfg, result: value })
            .expect("artifact serializes");
        fs::write(self.dir.join(name), text + "\n")?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    /// Registers a file or directory written by other means.
    pub fn register(&mut self, name: &str) {
        self.artifacts.push(name.to_string());
    }

    /// Merges this run into `manifest.json`.
    pub fn finish(mut self) -> CliResult<Vec<String>> {
        let path = self.dir.join(MANIFEST);
        let mut manifest: Manifest = fs::read_to_string(&path)
            .ok()
            .and_then(|t| serde_json::from_str(&t).ok())
            .unwrap_or_default();
        manifest.tool = env!("CARGO_PKG_NAME").to_string();
        manifest.version = env!("CARGO_PKG_VERSION").to_string();
        self.artifacts.sort();
        manifest.runs.insert(
            self.command.clone(),
            RunEntry {
                config: serde_json::from_str(&self.config_json).expect("valid json"),
                artifacts: self.artifacts.clone(),
            },
        );
        fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n")?;
        Ok(self.artifacts)
    }
}

/// CSV cell for an optional value.
pub fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}
