//! Run configuration: JSON file and flags, merged and validated.

use anyhow::{bail, Context, Result};
use burngrid::engine::{geometric_checkpoints, Backend, Placement};
use burngrid::geometry::CountMode;
use burngrid::growth::GrowthFunction;
use burngrid::rational::Rational;
use burngrid::strategies::{Schedule, StrategySpec};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::str::FromStr;

pub const DEFAULT_RATIO: f64 = 1.25;
pub const DEFAULT_FIRST_CHECKPOINT: u64 = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckpointSpec {
    Geometric {
        #[serde(default = "default_ratio")]
        ratio: f64,
        #[serde(default = "default_first")]
        start: u64,
    },
    Explicit { turns: Vec<u64> },
    PhaseEnds,
    Every,
}

fn default_ratio() -> f64 {
    DEFAULT_RATIO
}

fn default_first() -> u64 {
    DEFAULT_FIRST_CHECKPOINT
}

impl Default for CheckpointSpec {
    fn default() -> Self {
        CheckpointSpec::Geometric { ratio: DEFAULT_RATIO, start: DEFAULT_FIRST_CHECKPOINT }
    }
}

/// `geometric[:RATIO]`, `explicit:T1,T2,...`, `phase-ends` or `every`.
impl FromStr for CheckpointSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
        Ok(match (head, arg) {
            ("geometric", None) => CheckpointSpec::default(),
            ("geometric", Some(r)) => CheckpointSpec::Geometric {
                ratio: r.parse().with_context(|| format!("bad ratio {r:?}"))?,
                start: DEFAULT_FIRST_CHECKPOINT,
            },
            ("explicit", Some(list)) => CheckpointSpec::Explicit {
                turns: list
                    .split(',')
                    .map(|t| t.trim().parse().with_context(|| format!("bad turn {t:?}")))
                    .collect::<Result<_>>()?,
            },
            ("phase-ends", None) => CheckpointSpec::PhaseEnds,
            ("every", None) => CheckpointSpec::Every,
            _ => bail!("expected geometric[:RATIO], explicit:T1,T2,..., phase-ends or every, got {s:?}"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendChoice {
    Oracle,
    Geometric,
    CertifiedGeometric,
    /// Oracle and geometric, compared at every checkpoint.
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountChoice {
    Exact,
    Sampled { rows: u64, seed: u64 },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// One run as written in a config file; missing fields fall back to flags
/// and then to defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub growth: Option<String>,
    pub strategy: Option<StrategySpec>,
    pub horizon: Option<u64>,
    pub checkpoints: Option<CheckpointSpec>,
    pub backend: Option<BackendChoice>,
    pub count_mode: Option<CountChoice>,
    /// Checkpoints up to this turn are counted exactly even when sampling.
    pub exact_through: Option<u64>,
    pub placement: Option<Placement>,
    pub cell_budget: Option<u64>,
    #[serde(default)]
    pub outputs: Outputs,
}

/// A config file holds one run or a list of runs.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    One(Box<RunConfig>),
    Many(Vec<RunConfig>),
}

pub fn load_config(path: &std::path::Path) -> Result<Vec<RunConfig>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let file: ConfigFile =
        serde_json::from_str(&text).with_context(|| format!("config {}: not a run or a list of runs", path.display()))?;
    Ok(match file {
        ConfigFile::One(r) => vec![*r],
        ConfigFile::Many(rs) => rs,
    })
}

impl RunConfig {
    /// Fields set in `over` replace those in `self`.
    pub fn overlay(mut self, over: &RunConfig) -> RunConfig {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f.clone(); } )* };
        }
        take!(growth, strategy, horizon, checkpoints, backend, count_mode, exact_through, placement, cell_budget);
        if over.outputs.csv.is_some() {
            self.outputs.csv = over.outputs.csv.clone();
        }
        if over.outputs.report.is_some() {
            self.outputs.report = over.outputs.report.clone();
        }
        if over.outputs.svg.is_some() {
            self.outputs.svg = over.outputs.svg.clone();
        }
        self
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let growth_text = self.growth.as_deref().context("growth: missing (use --growth or the config file)")?;
        let growth: GrowthFunction = growth_text.parse().with_context(|| format!("growth: cannot parse {growth_text:?}"))?;
        let horizon = self.horizon.context("horizon: missing")?;
        if horizon == 0 {
            bail!("horizon: must be at least 1");
        }
        let strategy = self.strategy.clone().context("strategy: missing")?;
        let backend = self.backend.unwrap_or(BackendChoice::Geometric);
        if backend == BackendChoice::Geometric && !growth.is_strictly_increasing() {
            bail!(
                "backend: geometric counting needs a strictly increasing growth function, {} is not \
                 (use oracle or certified-geometric, or wrap it in repaired(...))",
                growth.describe()
            );
        }
        let count_mode = match self.count_mode.unwrap_or(CountChoice::Exact) {
            CountChoice::Exact => CountMode::Exact,
            CountChoice::Sampled { rows: 0, .. } => bail!("count_mode: sampled rows must be at least 1"),
            CountChoice::Sampled { rows, seed } => CountMode::Sampled { rows, seed },
        };
        let schedule = strategy
            .compile(&growth, horizon)
            .with_context(|| format!("strategy: cannot build {}", strategy.describe()))?;
        let checkpoints = match self.checkpoints.clone().unwrap_or_default() {
            CheckpointSpec::Geometric { ratio, start } => {
                if ratio.is_nan() || ratio <= 1.0 || start == 0 {
                    bail!("checkpoints: geometric ratio must exceed 1 and start at turn 1 or later");
                }
                geometric_checkpoints(start, ratio, horizon)
            }
            CheckpointSpec::Explicit { mut turns } => {
                turns.sort_unstable();
                turns.dedup();
                if turns.first() == Some(&0) || turns.last().is_some_and(|&t| t > horizon) || turns.is_empty() {
                    bail!("checkpoints: explicit turns must lie in 1..={horizon}");
                }
                turns
            }
            CheckpointSpec::PhaseEnds => {
                let ends = schedule
                    .phase_ends()
                    .context("checkpoints: phase-ends needs a phase or full-burn strategy")?;
                if ends.is_empty() {
                    bail!("checkpoints: no phase ends up to horizon {horizon}");
                }
                ends
            }
            CheckpointSpec::Every => (1..=horizon).collect(),
        };
        Ok(ResolvedRun {
            growth,
            schedule,
            horizon,
            checkpoints,
            backend,
            count_mode,
            exact_through: self.exact_through.unwrap_or(0),
            placement: self.placement.unwrap_or_default(),
            cell_budget: self.cell_budget,
            outputs: self.outputs.clone(),
        })
    }
}

pub struct ResolvedRun {
    pub growth: GrowthFunction,
    pub schedule: Schedule,
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    pub backend: BackendChoice,
    pub count_mode: CountMode,
    pub exact_through: u64,
    pub placement: Placement,
    pub cell_budget: Option<u64>,
    pub outputs: Outputs,
}

impl BackendChoice {
    pub fn single(self) -> Option<Backend> {
        match self {
            BackendChoice::Oracle => Some(Backend::Oracle),
            BackendChoice::Geometric => Some(Backend::Geometric),
            BackendChoice::CertifiedGeometric => Some(Backend::CertifiedGeometric),
            BackendChoice::Both => None,
        }
    }
}

/// Strategy shorthands: `constant-origin`, `single-origin`, `full-burn`,
/// `phase[:C]`, an inline JSON spec, or `@path` to a JSON file.
pub fn parse_strategy(s: &str) -> Result<StrategySpec> {
    let s = s.trim();
    if let Some(path) = s.strip_prefix('@') {
        let text = std::fs::read_to_string(path).with_context(|| format!("strategy: reading {path}"))?;
        return StrategySpec::from_json(&text).with_context(|| format!("strategy: bad JSON in {path}"));
    }
    if s.starts_with('{') {
        return StrategySpec::from_json(s).context("strategy: bad inline JSON");
    }
    let (head, arg) = s.split_once(':').map_or((s, None), |(h, a)| (h, Some(a)));
    Ok(match (head, arg) {
        ("constant-origin", None) => StrategySpec::constant_origin(),
        ("single-origin", None) => StrategySpec::single_origin(),
        ("full-burn", None) => StrategySpec::full_burn(),
        ("phase", None) => StrategySpec::phase(Rational::ONE),
        ("phase", Some(c)) => StrategySpec::phase(c.parse().map_err(|e| anyhow::anyhow!("strategy: bad c {c:?}: {e}"))?),
        _ => bail!("strategy: unknown {s:?}"),
    })
}
