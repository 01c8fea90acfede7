use rand::seq::SliceRandom;
use rand::Rng;

use super::{HdConfig, WealthDistribution, VARIABLES};
use crate::error::{Error, Result};
use crate::expr::{CompiledRule, Rule};
use crate::seed;

const PLACEMENT_STREAM: u64 = 11;

#[derive(Clone, Debug, PartialEq)]
pub struct HdAgent {
    pub id: usize,
    /// Location occupied this tick; `None` before the first placement.
    pub home: Option<usize>,
    pub total_resource: f64,
    pub previous_took: f64,
    pub previous_resource: f64,
    pub previous_agents: f64,
    relocate: bool,
}

/// What happened during one tick, indexed by agent id.
#[derive(Clone, Debug, PartialEq)]
pub struct TickOutcome {
    pub locations: Vec<usize>,
    pub demands: Vec<f64>,
    pub receipts: Vec<f64>,
    pub conflicts: usize,
}

#[derive(Clone, Debug)]
pub struct HdWorld {
    config: HdConfig,
    agents: Vec<HdAgent>,
    tick: usize,
}

impl HdWorld {
    pub fn new(config: &HdConfig) -> Result<Self> {
        config.validate()?;
        let agents = (0..config.n_agents)
            .map(|id| HdAgent {
                id,
                home: None,
                total_resource: 0.0,
                previous_took: 0.0,
                previous_resource: 0.0,
                previous_agents: 0.0,
                relocate: true,
            })
            .collect();
        Ok(HdWorld {
            config: config.clone(),
            agents,
            tick: 0,
        })
    }

    pub fn agents(&self) -> &[HdAgent] {
        &self.agents
    }

    pub fn tick(&self) -> usize {
        self.tick
    }

    /// Agents that received nothing last tick (and everyone on the first
    /// tick) are placed in shuffled order, each on a uniformly chosen
    /// location with spare capacity other than its previous one; the rest
    /// return home first.
    fn place<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<usize> {
        let cap = 2u8;
        let mut occupancy = vec![0u8; self.config.n_locations];
        for a in self.agents.iter().filter(|a| !a.relocate) {
            occupancy[a.home.expect("settled agents have a home")] += 1;
        }
        let mut movers: Vec<usize> = self.agents.iter().filter(|a| a.relocate).map(|a| a.id).collect();
        movers.shuffle(rng);
        let mut candidates = Vec::with_capacity(self.config.n_locations);
        for id in movers {
            let old = self.agents[id].home;
            candidates.clear();
            candidates.extend((0..occupancy.len()).filter(|&l| occupancy[l] < cap && Some(l) != old));
            let chosen = if candidates.is_empty() {
                old.expect("capacity admits every agent")
            } else {
                candidates[rng.gen_range(0..candidates.len())]
            };
            occupancy[chosen] += 1;
            self.agents[id].home = Some(chosen);
        }
        self.agents.iter().map(|a| a.home.expect("placed")).collect()
    }

    /// Advances one tick: placement, decisions, conflict resolution, update.
    pub fn step<R: Rng + ?Sized>(&mut self, rule: &CompiledRule, rng: &mut R) -> TickOutcome {
        let r = self.config.resource;
        let locations = self.place(rng);
        let mut count = vec![0usize; self.config.n_locations];
        for &l in &locations {
            count[l] += 1;
        }

        let demands: Vec<f64> = self
            .agents
            .iter()
            .map(|a| {
                let row = [
                    r,
                    count[locations[a.id]] as f64,
                    a.previous_took,
                    a.previous_resource,
                    a.previous_agents,
                    self.config.n_agents as f64,
                    a.total_resource,
                ];
                let want = rule.eval(&row);
                if want.is_nan() {
                    0.0
                } else {
                    want.clamp(0.0, r)
                }
            })
            .collect();

        let mut load = vec![0.0f64; self.config.n_locations];
        for (a, &d) in self.agents.iter().zip(&demands) {
            load[locations[a.id]] += d;
        }
        let contested: Vec<bool> = load.iter().map(|&l| l > r).collect();
        let receipts: Vec<f64> = self
            .agents
            .iter()
            .zip(&demands)
            .map(|(a, &d)| if contested[locations[a.id]] { 0.0 } else { d })
            .collect();

        for (a, &got) in self.agents.iter_mut().zip(&receipts) {
            let l = locations[a.id];
            a.total_resource += got;
            a.previous_took = got;
            a.previous_resource = r;
            a.previous_agents = count[l] as f64;
            a.relocate = got == 0.0;
        }
        self.tick += 1;
        TickOutcome {
            locations,
            demands,
            receipts,
            conflicts: contested.iter().filter(|&&c| c).count(),
        }
    }

    pub fn distribution(&self) -> WealthDistribution {
        WealthDistribution::new(self.agents.iter().map(|a| a.total_resource).collect())
    }
}

pub fn compile(rule: &Rule) -> Result<CompiledRule> {
    CompiledRule::compile_with_names(rule, &VARIABLES).map_err(|e| match e {
        Error::UnboundVariable(name) => Error::Schema {
            missing: vec![name],
            available: VARIABLES.iter().map(|s| s.to_string()).collect(),
        },
        other => other,
    })
}

/// Runs `config.ticks` steps and returns the sorted final wealth.
pub fn run(config: &HdConfig, rule: &Rule) -> Result<WealthDistribution> {
    let compiled = compile(rule).map_err(|e| Error::in_rule(rule, e))?;
    run_compiled(config, &compiled)
}

pub fn run_compiled(config: &HdConfig, rule: &CompiledRule) -> Result<WealthDistribution> {
    let mut world = HdWorld::new(config)?;
    let mut rng = placement_stream(config.seed);
    for _ in 0..config.ticks {
        world.step(rule, &mut rng);
    }
    Ok(world.distribution())
}

/// Placement stream used by [`run`] for a given config seed.
pub fn placement_stream(config_seed: u64) -> seed::Stream {
    seed::stream(config_seed, &[PLACEMENT_STREAM])
}
