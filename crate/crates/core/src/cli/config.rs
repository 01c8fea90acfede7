use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::VarRanges;
use crate::gp::GpConfig;
use crate::hawkdove::{HdConfig, ReferenceSpec};
use crate::rebellion::{Metric, RebConfig, Task};

/// What a run models: the hawk-dove wealth fit or one rebellion decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskSpec {
    HawkDove,
    Rebellion(Task),
}

impl FromStr for TaskSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("hawkdove") {
            return Ok(TaskSpec::HawkDove);
        }
        s.strip_prefix("rebellion:")
            .and_then(Task::from_code)
            .map(TaskSpec::Rebellion)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown task `{s}`; expected hawkdove, rebellion:M, rebellion:A or rebellion:C"
                ))
            })
    }
}

impl fmt::Display for TaskSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskSpec::HawkDove => f.write_str("hawkdove"),
            TaskSpec::Rebellion(t) => write!(f, "rebellion:{}", t.code()),
        }
    }
}

impl Serialize for TaskSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TaskSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every setting a command may read. Sections a command does not use are
/// ignored; all fields have defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Overrides the seed of every section when set.
    pub seed: Option<u64>,
    /// `record`: which reference to build (hawkdove or rebellion).
    pub target: Option<String>,
    /// `evolve` and `eval`.
    pub task: Option<TaskSpec>,
    /// `simulate`: hawkdove or rebellion.
    pub model: Option<String>,
    pub dataset: Option<PathBuf>,
    pub metric: Metric,
    /// Simulation repeats averaged by hawk-dove fitness.
    pub n_repeats: usize,
    /// Histogram bins written by `simulate`.
    pub bins: usize,
    pub gp: GpConfig,
    pub hawkdove: HdConfig,
    pub rebellion: RebConfig,
    /// Rebellion runs for `record`; three legitimacy levels when absent.
    pub runs: Option<Vec<RebConfig>>,
    /// Hawk-dove reference for `record`, or for `evolve` without a dataset.
    pub reference: Option<ReferenceSpec>,
    /// Variable ranges for `prune`.
    pub ranges: Option<VarRanges>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: None,
            target: None,
            task: None,
            model: None,
            dataset: None,
            metric: Metric::default(),
            n_repeats: 3,
            bins: 10,
            gp: GpConfig::default(),
            hawkdove: HdConfig::default(),
            rebellion: RebConfig::default(),
            runs: None,
            reference: None,
            ranges: None,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Pushes the master seed into every section.
    pub fn resolve_seed(&mut self, flag: Option<u64>) {
        if let Some(s) = flag.or(self.seed) {
            self.seed = Some(s);
            self.gp.seed = s;
            self.hawkdove.seed = s;
            self.rebellion.seed = s;
            if let Some(runs) = &mut self.runs {
                for (i, r) in runs.iter_mut().enumerate() {
                    r.seed = crate::seed::derive(s, &[i as u64]);
                }
            }
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.seed.unwrap_or(self.gp.seed)
    }
}
