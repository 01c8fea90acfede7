//! Civil-violence model on a torus.
//!
//! Citizens with a perceived hardship and a risk aversion turn active
//! (riot) when their grievance, discounted by the chance of being
//! arrested, exceeds a threshold. Cops arrest active citizens in view and
//! send them to jail for a random term. Every tick runs three decisions in
//! order: move (M), activate (A) and enforce (C). Agent variables are
//! captured just before each of them, which turns a run into a static
//! labelled dataset on which each decision can be evolved as a classifier.

mod classify;
mod schema;
mod sim;
mod trace;

use serde::{Deserialize, Serialize};

pub use classify::{classify_fitness, ClassifierData, Metric};
pub use schema::{
    columns, static_slot, step_slot, variable_names, variables_through, Row, IDENTIFIERS, LABELS, N_VARIABLES,
    STATIC_VARIABLES, STEPS, STEP_VARIABLES,
};
pub use sim::{run_evolved, run_original, Breed, SnapshotRecord};
pub use trace::{compare_traces, SeriesComparison, Trace, TraceComparison, TraceRow};

use crate::error::{Error, Result};
use crate::expr::{parse_rule, ConstantPool, Grammar, Rule, VarRanges};
use crate::gp::RuleGrammar;
use crate::refdata::ReferenceDataset;
use crate::seed;

const CONFIG_STREAM: u64 = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RebConfig {
    pub width: usize,
    pub height: usize,
    pub citizen_density: f64,
    pub cop_density: f64,
    pub legitimacy: f64,
    pub max_jail_term: u32,
    /// Radius in patches.
    pub vision: f64,
    pub threshold: f64,
    pub arrest_constant: f64,
    pub ticks: usize,
    pub seed: u64,
}

impl Default for RebConfig {
    fn default() -> Self {
        RebConfig {
            width: 33,
            height: 33,
            citizen_density: 0.70,
            cop_density: 0.04,
            legitimacy: 0.82,
            max_jail_term: 30,
            vision: 7.0,
            threshold: 0.1,
            arrest_constant: 2.3,
            ticks: 40,
            seed: 0,
        }
    }
}

impl RebConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.width == 0 || self.height == 0 {
            return bad("grid dimensions must be positive".into());
        }
        for (name, v) in [("citizen_density", self.citizen_density), ("cop_density", self.cop_density)] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        if self.citizen_density + self.cop_density >= 1.0 {
            return bad("citizen_density + cop_density must be below 1".into());
        }
        if !(0.0..=1.0).contains(&self.legitimacy) {
            return bad(format!("legitimacy must lie in [0, 1], got {}", self.legitimacy));
        }
        if self.max_jail_term == 0 {
            return bad("max_jail_term must be at least 1".into());
        }
        if !(self.vision.is_finite() && self.vision >= 0.0) {
            return bad("vision must be finite and non-negative".into());
        }
        if !self.threshold.is_finite() || !(self.arrest_constant.is_finite() && self.arrest_constant >= 0.0) {
            return bad("threshold and arrest_constant must be finite, arrest_constant non-negative".into());
        }
        if self.ticks == 0 {
            return bad("ticks must be at least 1".into());
        }
        Ok(())
    }

    /// Number of cops and citizens placed at start.
    pub fn population(&self) -> (usize, usize) {
        let patches = (self.width * self.height) as f64;
        ((self.cop_density * patches).round() as usize, (self.citizen_density * patches).round() as usize)
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        RebConfig { seed, ..self.clone() }
    }
}

/// Three runs at legitimacy 0.82, 0.86 and 0.90 with seeds drawn from `seed`.
pub fn default_configs(seed: u64) -> Vec<RebConfig> {
    [0.82, 0.86, 0.90]
        .into_iter()
        .enumerate()
        .map(|(i, legitimacy)| RebConfig {
            legitimacy,
            seed: seed::derive(seed, &[CONFIG_STREAM, i as u64]),
            ..Default::default()
        })
        .collect()
}

/// Runs every config with the native rules and stacks the snapshots into one
/// dataset; `runId` is the position in `configs`.
pub fn record_dataset(configs: &[RebConfig]) -> Result<ReferenceDataset> {
    if configs.is_empty() {
        return Err(Error::Config("at least one rebellion config is required".into()));
    }
    let mut rows = Vec::new();
    let mut offset = 0;
    for (run, config) in configs.iter().enumerate() {
        let (_, records) = sim::run_original_as(config, run, offset)?;
        for r in records {
            let mut row = Vec::with_capacity(IDENTIFIERS.len() + N_VARIABLES + LABELS.len());
            row.extend([r.run_id as f64, r.tick as f64, r.agent_id as f64, r.period as f64]);
            row.extend_from_slice(&r.variables);
            row.extend_from_slice(&r.labels);
            rows.push(row);
        }
        offset += config.ticks;
    }
    let provenance = format!("rebellion runs={} config={:016x}", configs.len(), config_hash(configs)?);
    ReferenceDataset::from_rows(columns(), &rows, provenance)
}

fn config_hash(configs: &[RebConfig]) -> Result<u64> {
    let bytes = serde_json::to_vec(configs)?;
    Ok(bytes
        .chunks(8)
        .fold(0, |acc, c| seed::derive(acc, &[c.iter().fold(0u64, |w, &b| w << 8 | b as u64)])))
}

/// Bounds of every snapshot variable under `config`.
pub fn ranges(config: &RebConfig) -> VarRanges {
    let hood = sim::neighborhood_size(config) as f64;
    let mut r = VarRanges::new();
    for s in 0..STEPS {
        r = r
            .with_integral(&format!("jailTerm{s}"), 0.0, config.max_jail_term as f64)
            .with_integral(&format!("active{s}"), 0.0, 1.0)
            .with_integral(&format!("movementTracker{s}"), 0.0, 1.0)
            .with_integral(&format!("freeNeighborhood{s}"), 0.0, hood)
            .with_integral(&format!("copsOnNeighborhood{s}"), 0.0, hood)
            .with_integral(&format!("activesOnNeighborhood{s}"), 0.0, hood)
            .with(&format!("estimatedArrestProbability{s}"), 0.0, 1.0)
            .with_integral(&format!("xcor{s}"), 0.0, (config.width - 1) as f64)
            .with_integral(&format!("ycor{s}"), 0.0, (config.height - 1) as f64);
    }
    let point = |r: VarRanges, name: &str, v: f64| r.with(name, v, v);
    r = r
        .with_integral("breed", 0.0, 1.0)
        .with("grievance", 0.0, 1.0 - config.legitimacy)
        .with("perceivedHardship", 0.0, 1.0)
        .with("riskAversion", 0.0, 1.0);
    r = point(r, "governmentLegitimacy", config.legitimacy);
    r = point(r, "threshold", config.threshold);
    r = point(r, "vision", config.vision);
    r = point(r, "arrestConstant", config.arrest_constant);
    r = point(r, "maxJailTerm", config.max_jail_term as f64);
    r = point(r, "citizenDensity", config.citizen_density);
    point(r, "copDensity", config.cop_density)
}

/// One decision rule per step.
#[derive(Clone, Debug, PartialEq)]
pub struct Rules {
    pub moves: Rule,
    pub activation: Rule,
    pub enforcement: Rule,
}

impl Rules {
    /// The model's own decisions written as rules over the snapshot schema.
    pub fn ground_truth() -> Self {
        Rules {
            moves: Task::Move.ground_truth(),
            activation: Task::Activate.ground_truth(),
            enforcement: Task::Enforce.ground_truth(),
        }
    }

    pub fn get(&self, task: Task) -> &Rule {
        match task {
            Task::Move => &self.moves,
            Task::Activate => &self.activation,
            Task::Enforce => &self.enforcement,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    #[serde(rename = "M")]
    Move,
    #[serde(rename = "A")]
    Activate,
    #[serde(rename = "C")]
    Enforce,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Move, Task::Activate, Task::Enforce];

    pub fn code(self) -> &'static str {
        match self {
            Task::Move => "M",
            Task::Activate => "A",
            Task::Enforce => "C",
        }
    }

    pub fn from_code(code: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.code().eq_ignore_ascii_case(code))
    }

    pub fn step(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        LABELS[self.step()]
    }

    /// Rows the classifier is trained on: citizens for M and A, everyone
    /// for C.
    pub fn breed_filter(self) -> Option<Breed> {
        match self {
            Task::Move | Task::Activate => Some(Breed::Citizen),
            Task::Enforce => None,
        }
    }

    /// Variables visible when the decision is taken.
    pub fn variables(self) -> Vec<String> {
        variables_through(self.step())
    }

    /// Bare boolean rules with two-decimal real constants in [0, 1].
    pub fn grammar(self) -> RuleGrammar {
        let constants = ConstantPool::Reals {
            min: 0.0,
            max: 1.0,
            decimals: 2,
        };
        RuleGrammar::bare(Grammar::new(self.variables(), constants))
    }

    pub fn ground_truth(self) -> Rule {
        let text = match self {
            Task::Move => "jailTerm0 == 0 AND freeNeighborhood0 > 0",
            Task::Activate => {
                "jailTerm1 == 0 AND grievance - riskAversion * estimatedArrestProbability1 > threshold"
            }
            Task::Enforce => "breed == 1 AND activesOnNeighborhood2 > 0",
        };
        parse_rule(text).expect("ground-truth rules parse")
    }
}
