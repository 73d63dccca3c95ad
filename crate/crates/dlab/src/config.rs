//! Flat JSON experiment configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use dlab_core::circuit::CouplingMap;
use dlab_core::darwinism::{SchemeKind, DEFAULT_GRID_STEPS};
use dlab_core::scm::{canonical_times, Scenario, ScmParams, TimeGrid};
use dlab_core::simulator::NoiseModel;
use dlab_core::tomography::MleOptions;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// A time as a number or a preset name (`t_max`, `t_close`, `t_rec`),
/// optionally scaled: `2*t_max`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TimeItem {
    Value(f64),
    Preset(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    One(TimeItem),
    List(Vec<TimeItem>),
    Grid(GridSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: TimeItem,
    pub stop: TimeItem,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum PartitionSpec {
    One(String),
    List(Vec<String>),
}

fn default_theta() -> f64 {
    PI
}

fn default_lam() -> f64 {
    1.0
}

fn default_map() -> String {
    "casablanca".into()
}

fn default_partition() -> PartitionSpec {
    PartitionSpec::One("per_qubit".into())
}

fn default_outputs() -> PathBuf {
    PathBuf::from("out")
}

fn default_grid_steps() -> usize {
    DEFAULT_GRID_STEPS
}

fn default_fraction_size() -> usize {
    1
}

/// The document as written.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Scenario,
    pub n: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default = "default_lam")]
    pub lam: f64,
    pub times: TimeSpec,
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseModel,
    #[serde(default = "default_map")]
    pub coupling_map: String,
    #[serde(default = "default_partition")]
    pub partition: PartitionSpec,
    #[serde(default = "default_outputs")]
    pub outputs: PathBuf,
    #[serde(default = "default_grid_steps")]
    pub grid_steps: usize,
    #[serde(default = "default_fraction_size")]
    pub fraction_size: usize,
    #[serde(default)]
    pub tomography: bool,
    #[serde(default)]
    pub mle: MleOptions,
}

/// Validated configuration with every default and preset resolved. This is
/// what gets embedded in each output file; `outputs` is left out so results
/// do not depend on where they were written.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub n: usize,
    pub theta: f64,
    pub lam: f64,
    pub times: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseModel,
    pub coupling_map: String,
    pub partition: Vec<SchemeKind>,
    pub grid_steps: usize,
    pub fraction_size: usize,
    pub tomography: bool,
    pub mle: MleOptions,
    #[serde(skip)]
    pub outputs: PathBuf,
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("field `{field}`: {msg}"))
}

fn resolve_time(item: &TimeItem) -> CliResult<f64> {
    let name = match item {
        TimeItem::Value(t) => return Ok(*t),
        TimeItem::Preset(s) => s.trim(),
    };
    let (t_max, t_close, t_rec) = canonical_times();
    let (factor, preset) = match name.split_once('*') {
        Some((k, p)) => (
            k.trim().parse::<f64>().map_err(|_| bad("times", format!("bad factor in `{name}`")))?,
            p.trim(),
        ),
        None => (1.0, name),
    };
    let base = match preset {
        "t_max" => t_max,
        "t_close" => t_close,
        "t_rec" => t_rec,
        _ => return Err(bad("times", format!("unknown preset `{name}`"))),
    };
    Ok(factor * base)
}

fn resolve_times(spec: &TimeSpec) -> CliResult<Vec<f64>> {
    let times = match spec {
        TimeSpec::One(t) => vec![resolve_time(t)?],
        TimeSpec::List(ts) => ts.iter().map(resolve_time).collect::<CliResult<_>>()?,
        TimeSpec::Grid(g) => {
            if g.points == 0 {
                return Err(bad("times", "grid needs at least one point"));
            }
            TimeGrid::linspace(resolve_time(&g.start)?, resolve_time(&g.stop)?, g.points)
                .map_err(|e| bad("times", e))?
                .times()
                .to_vec()
        }
    };
    if times.is_empty() {
        return Err(bad("times", "no times given"));
    }
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(bad("times", format!("{t} is not a finite non-negative time")));
    }
    Ok(times)
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {} column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn resolve(self) -> CliResult<ExperimentConfig> {
        let params = ScmParams::new(self.theta, self.lam, self.n, self.scenario)
            .map_err(|e| bad("scenario/n/theta/lam", e))?;
        self.noise.validate().map_err(|e| bad("noise", e))?;
        self.mle.validate().map_err(|e| bad("mle", e))?;
        let names = match &self.partition {
            PartitionSpec::One(s) => vec![s.clone()],
            PartitionSpec::List(v) => v.clone(),
        };
        if names.is_empty() {
            return Err(bad("partition", "no scheme given"));
        }
        let mut partition = Vec::new();
        for name in &names {
            let kind: SchemeKind = name.parse().map_err(|e| bad("partition", e))?;
            dlab_core::darwinism::PartitionScheme::for_model(kind, &params).map_err(|e| bad("partition", e))?;
            if partition.contains(&kind) {
                return Err(bad("partition", format!("`{name}` listed twice")));
            }
            partition.push(kind);
        }
        if self.grid_steps < 2 {
            return Err(bad("grid_steps", "need at least 2"));
        }
        if self.fraction_size == 0 || self.fraction_size > self.n {
            return Err(bad("fraction_size", format!("must lie in 1..={}", self.n)));
        }
        if self.outputs.as_os_str().is_empty() {
            return Err(bad("outputs", "empty path"));
        }
        let cfg = ExperimentConfig {
            scenario: self.scenario,
            n: self.n,
            theta: self.theta,
            lam: self.lam,
            times: resolve_times(&self.times)?,
            shots: self.shots,
            seed: self.seed,
            noise: self.noise,
            coupling_map: self.coupling_map,
            partition,
            grid_steps: self.grid_steps,
            fraction_size: self.fraction_size,
            tomography: self.tomography,
            mle: self.mle,
            outputs: self.outputs,
        };
        cfg.coupling()?;
        Ok(cfg)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        RawConfig::parse(&text)?.resolve()
    }

    pub fn params(&self) -> ScmParams {
        ScmParams {
            theta: self.theta,
            lam: self.lam,
            n: self.n,
            scenario: self.scenario,
        }
    }

    /// Built-in map by name, otherwise an edge-list file.
    pub fn coupling(&self) -> CliResult<CouplingMap> {
        CouplingMap::by_name(&self.coupling_map).or_else(|_| {
            CouplingMap::load(Path::new(&self.coupling_map)).map_err(|e| bad("coupling_map", e))
        })
    }

    pub fn require_shots(&self) -> CliResult<()> {
        if self.shots == 0 {
            return Err(bad("shots", "this command needs shots >= 1"));
        }
        Ok(())
    }

    /// Compact JSON used in every artifact header.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> CliResult<ExperimentConfig> {
        RawConfig::parse(text)?.resolve()
    }

    #[test]
    fn presets_and_grids() {
        let c = cfg(r#"{"scenario": "condensed", "n": 6, "times": ["t_max", "2*t_max", 0.5]}"#).unwrap();
        let t_max = canonical_times().0;
        assert_eq!(c.times, vec![t_max, 2.0 * t_max, 0.5]);
        let g = cfg(r#"{"scenario": "full", "n": 3, "times": {"start": 0, "stop": "t_rec", "points": 31}}"#).unwrap();
        assert_eq!(g.times.len(), 31);
        assert_eq!(g.times[30], canonical_times().2);
        assert_eq!(g.partition, vec![SchemeKind::PerQubit]);
    }

    #[test]
    fn rejects_invalid_documents() {
        for text in [
            r#"{"scenario": "condensed", "n": 0, "times": 1}"#,
            r#"{"scenario": "condensed", "n": 2, "theta": 1.0, "times": 1}"#,
            r#"{"scenario": "condensed", "n": 2, "times": -1}"#,
            r#"{"scenario": "condensed", "n": 2, "times": "t_later"}"#,
            r#"{"scenario": "condensed", "n": 2, "times": 1, "noise": {"depol_1q": 2}}"#,
            r#"{"scenario": "condensed", "n": 2, "times": 1, "partition": "ancillae_only"}"#,
            r#"{"scenario": "condensed", "n": 2, "times": 1, "coupling_map": "nowhere.txt"}"#,
            r#"{"scenario": "condensed", "n": 2, "times": 1, "colour": "red"}"#,
            r#"{"scenario": "condensed", "n": 2, "times": 1, "fraction_size": 3}"#,
        ] {
            assert!(matches!(cfg(text), Err(CliError::Config(_))), "{text}");
        }
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let err = cfg("{\n  \"scenario\": \"full\",\n  \"n\": 3,,\n}").unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
    }
}
