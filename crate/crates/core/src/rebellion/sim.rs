use rand::seq::SliceRandom;
use rand::Rng;

use super::schema::*;
use super::{RebConfig, Rules, Trace, TraceRow};
use crate::error::{Error, Result};
use crate::expr::{truthy, CompiledRule, Rule};
use crate::refdata::quantize;
use crate::seed;

const RUN_STREAM: u64 = 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Breed {
    Citizen,
    Cop,
}

#[derive(Clone, Debug)]
struct Agent {
    breed: Breed,
    patch: usize,
    hardship: f64,
    risk_aversion: f64,
    grievance: f64,
    active: bool,
    jail: u32,
    moved: bool,
}

impl Agent {
    fn is_citizen(&self) -> bool {
        self.breed == Breed::Citizen
    }

    fn jailed(&self) -> bool {
        self.jail > 0
    }

    /// Cops and free citizens block a patch; jailed citizens do not.
    fn occupies(&self) -> bool {
        !(self.is_citizen() && self.jailed())
    }
}

/// One agent's captured variables and the decisions taken from them.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRecord {
    pub run_id: usize,
    pub tick: usize,
    pub agent_id: usize,
    /// Tick counted across all runs of a recording, from 1.
    pub period: usize,
    pub variables: Row,
    /// movedLabel, activeLabel, enforcedLabel.
    pub labels: [f64; 3],
}

enum Policy {
    Original,
    Evolved {
        moves: CompiledRule,
        activation: CompiledRule,
        enforcement: CompiledRule,
    },
}

impl Policy {
    fn compile(rules: &Rules) -> Result<Self> {
        let names = variable_names();
        let compile = |rule: &Rule, step: usize| -> Result<CompiledRule> {
            let allowed = variables_through(step);
            let missing: Vec<String> = rule.variables().into_iter().filter(|v| !allowed.contains(v)).collect();
            if !missing.is_empty() {
                return Err(Error::in_rule(
                    rule,
                    Error::Schema {
                        missing,
                        available: allowed,
                    },
                ));
            }
            CompiledRule::compile_with_names(rule, &names).map_err(|e| Error::in_rule(rule, e))
        };
        Ok(Policy::Evolved {
            moves: compile(&rules.moves, 0)?,
            activation: compile(&rules.activation, 1)?,
            enforcement: compile(&rules.enforcement, 2)?,
        })
    }
}

struct World<'a> {
    config: &'a RebConfig,
    agents: Vec<Agent>,
    neighborhoods: Vec<Vec<u32>>,
    rng: seed::Stream,
}

/// Patches within Euclidean distance `vision` on the torus, own patch
/// included.
fn neighborhoods(width: usize, height: usize, vision: f64) -> Vec<Vec<u32>> {
    let reach = vision.floor() as i64;
    let mut offsets = Vec::new();
    for dy in -reach..=reach {
        for dx in -reach..=reach {
            if ((dx * dx + dy * dy) as f64) <= vision * vision {
                offsets.push((dx, dy));
            }
        }
    }
    let (w, h) = (width as i64, height as i64);
    (0..width * height)
        .map(|p| {
            let (x, y) = ((p % width) as i64, (p / width) as i64);
            let mut patches: Vec<u32> = offsets
                .iter()
                .map(|(dx, dy)| ((x + dx).rem_euclid(w) + (y + dy).rem_euclid(h) * w) as u32)
                .collect();
            patches.sort_unstable();
            patches.dedup();
            patches
        })
        .collect()
}

pub(super) fn neighborhood_size(config: &RebConfig) -> usize {
    neighborhoods(config.width, config.height, config.vision)
        .first()
        .map_or(0, Vec::len)
}

impl<'a> World<'a> {
    fn new(config: &'a RebConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = seed::stream(config.seed, &[RUN_STREAM]);
        let n_patches = config.width * config.height;
        let (n_cops, n_citizens) = config.population();
        let mut patches: Vec<usize> = (0..n_patches).collect();
        patches.shuffle(&mut rng);
        let legitimacy = config.legitimacy;
        let agents = patches[..n_cops + n_citizens]
            .iter()
            .enumerate()
            .map(|(i, &patch)| {
                if i < n_cops {
                    Agent {
                        breed: Breed::Cop,
                        patch,
                        hardship: 0.0,
                        risk_aversion: 0.0,
                        grievance: 0.0,
                        active: false,
                        jail: 0,
                        moved: false,
                    }
                } else {
                    let hardship = quantize(rng.gen::<f64>());
                    let risk_aversion = quantize(rng.gen::<f64>());
                    Agent {
                        breed: Breed::Citizen,
                        patch,
                        hardship,
                        risk_aversion,
                        grievance: quantize(hardship * (1.0 - legitimacy)),
                        active: false,
                        jail: 0,
                        moved: false,
                    }
                }
            })
            .collect();
        Ok(World {
            config,
            agents,
            neighborhoods: neighborhoods(config.width, config.height, config.vision),
            rng,
        })
    }

    fn occupancy(&self) -> Vec<bool> {
        let mut occupied = vec![false; self.config.width * self.config.height];
        for a in self.agents.iter().filter(|a| a.occupies()) {
            occupied[a.patch] = true;
        }
        occupied
    }

    fn static_row(&self, a: &Agent) -> Row {
        let c = self.config;
        let mut row = [0.0; N_VARIABLES];
        row[static_slot(BREED)] = if a.is_citizen() { 0.0 } else { 1.0 };
        row[static_slot(GRIEVANCE)] = a.grievance;
        row[static_slot(HARDSHIP)] = a.hardship;
        row[static_slot(RISK_AVERSION)] = a.risk_aversion;
        row[static_slot(LEGITIMACY)] = c.legitimacy;
        row[static_slot(THRESHOLD)] = c.threshold;
        row[static_slot(VISION)] = c.vision;
        row[static_slot(ARREST_K)] = c.arrest_constant;
        row[static_slot(MAX_JAIL)] = c.max_jail_term as f64;
        row[static_slot(CITIZEN_DENSITY)] = c.citizen_density;
        row[static_slot(COP_DENSITY)] = c.cop_density;
        row
    }

    /// Writes the step-`step` variables of every agent into `rows`.
    fn capture(&self, step: usize, rows: &mut [Row]) {
        let n_patches = self.config.width * self.config.height;
        let mut cops_on = vec![0u32; n_patches];
        let mut actives_on = vec![0u32; n_patches];
        let occupied = self.occupancy();
        for a in &self.agents {
            match a.breed {
                Breed::Cop => cops_on[a.patch] += 1,
                Breed::Citizen if a.active => actives_on[a.patch] += 1,
                Breed::Citizen => {}
            }
        }
        let k = self.config.arrest_constant;
        for (a, row) in self.agents.iter().zip(rows.iter_mut()) {
            let hood = &self.neighborhoods[a.patch];
            let (mut cops, mut actives, mut free) = (0u32, 0u32, 0u32);
            for &p in hood {
                let p = p as usize;
                cops += cops_on[p];
                actives += actives_on[p];
                free += u32::from(!occupied[p]);
            }
            let ratio = (cops as f64 / actives.max(1) as f64).floor();
            let p = quantize(1.0 - (-k * ratio).exp());
            row[step_slot(JAIL, step)] = a.jail as f64;
            row[step_slot(ACTIVE, step)] = if a.active { 1.0 } else { 0.0 };
            row[step_slot(MOVED, step)] = if a.moved { 1.0 } else { 0.0 };
            row[step_slot(FREE, step)] = free as f64;
            row[step_slot(COPS, step)] = cops as f64;
            row[step_slot(ACTIVES, step)] = actives as f64;
            row[step_slot(ARREST_P, step)] = p;
            row[step_slot(XCOR, step)] = (a.patch % self.config.width) as f64;
            row[step_slot(YCOR, step)] = (a.patch / self.config.width) as f64;
        }
    }

    /// Agents that decided to move do so in random order, each to a
    /// uniformly chosen patch in vision that is still free.
    fn execute_moves(&mut self, decided: &[bool]) {
        let mut occupied = self.occupancy();
        let mut order: Vec<usize> = (0..self.agents.len()).filter(|&i| decided[i]).collect();
        order.shuffle(&mut self.rng);
        for a in self.agents.iter_mut() {
            a.moved = false;
        }
        let mut free = Vec::new();
        for i in order {
            let from = self.agents[i].patch;
            free.clear();
            free.extend(self.neighborhoods[from].iter().map(|&p| p as usize).filter(|&p| !occupied[p]));
            if free.is_empty() {
                continue;
            }
            let to = free[self.rng.gen_range(0..free.len())];
            occupied[from] = false;
            occupied[to] = true;
            self.agents[i].patch = to;
            self.agents[i].moved = true;
        }
    }

    /// Each enforcing cop arrests one active citizen in vision, chosen
    /// uniformly from those active when decisions were taken.
    fn execute_arrests(&mut self, enforcing: &[bool]) {
        let n_patches = self.config.width * self.config.height;
        let mut actives_on: Vec<Vec<usize>> = vec![Vec::new(); n_patches];
        for (i, a) in self.agents.iter().enumerate() {
            if a.is_citizen() && a.active {
                actives_on[a.patch].push(i);
            }
        }
        let mut suspects = Vec::new();
        for cop in 0..self.agents.len() {
            if !enforcing[cop] || self.agents[cop].is_citizen() {
                continue;
            }
            suspects.clear();
            for &p in &self.neighborhoods[self.agents[cop].patch] {
                suspects.extend_from_slice(&actives_on[p as usize]);
            }
            if suspects.is_empty() {
                continue;
            }
            let s = suspects[self.rng.gen_range(0..suspects.len())];
            let term = self.rng.gen_range(1..=self.config.max_jail_term);
            let suspect = &mut self.agents[s];
            suspect.active = false;
            suspect.jail = term;
        }
    }

    fn census(&self, tick: usize) -> TraceRow {
        let mut row = TraceRow {
            tick,
            quiet: 0,
            active: 0,
            jailed: 0,
        };
        for a in self.agents.iter().filter(|a| a.is_citizen()) {
            if a.jailed() {
                row.jailed += 1;
            } else if a.active {
                row.active += 1;
            } else {
                row.quiet += 1;
            }
        }
        row
    }

    /// Runs every tick; snapshots are collected when `records` is given.
    fn run(&mut self, policy: &Policy, run_id: usize, offset: usize, mut records: Option<&mut Vec<SnapshotRecord>>) -> Trace {
        let n = self.agents.len();
        let mut trace = Vec::with_capacity(self.config.ticks);
        let c = self.config;
        for tick in 1..=c.ticks {
            let mut rows: Vec<Row> = self.agents.iter().map(|a| self.static_row(a)).collect();
            let mut labels = vec![[0.0f64; 3]; n];

            self.capture(0, &mut rows);
            let moving: Vec<bool> = (0..n)
                .map(|i| {
                    let a = &self.agents[i];
                    let r = &rows[i];
                    match (a.breed, policy) {
                        (Breed::Citizen, _) if a.jailed() => false,
                        (Breed::Citizen, Policy::Evolved { moves, .. }) => truthy(moves.eval(r)),
                        _ => r[step_slot(JAIL, 0)] == 0.0 && r[step_slot(FREE, 0)] > 0.0,
                    }
                })
                .collect();
            self.execute_moves(&moving);

            self.capture(1, &mut rows);
            for i in 0..n {
                let r = &rows[i];
                let a = &mut self.agents[i];
                let rioting = match (a.breed, policy) {
                    (Breed::Cop, _) => false,
                    (Breed::Citizen, _) if a.jailed() => false,
                    (Breed::Citizen, Policy::Evolved { activation, .. }) => truthy(activation.eval(r)),
                    (Breed::Citizen, Policy::Original) => {
                        r[step_slot(JAIL, 1)] == 0.0
                            && r[static_slot(GRIEVANCE)] - r[static_slot(RISK_AVERSION)] * r[step_slot(ARREST_P, 1)]
                                > r[static_slot(THRESHOLD)]
                    }
                };
                a.active = rioting;
                labels[i][1] = f64::from(u8::from(rioting));
            }

            self.capture(2, &mut rows);
            let enforcing: Vec<bool> = (0..n)
                .map(|i| {
                    let r = &rows[i];
                    match (self.agents[i].breed, policy) {
                        (Breed::Citizen, _) => false,
                        (Breed::Cop, Policy::Evolved { enforcement, .. }) => truthy(enforcement.eval(r)),
                        (Breed::Cop, Policy::Original) => r[step_slot(ACTIVES, 2)] > 0.0,
                    }
                })
                .collect();
            self.execute_arrests(&enforcing);

            trace.push(self.census(tick));
            for a in self.agents.iter_mut() {
                a.jail = a.jail.saturating_sub(1);
            }

            if let Some(out) = records.as_deref_mut() {
                for i in 0..n {
                    labels[i][0] = f64::from(u8::from(moving[i]));
                    labels[i][2] = f64::from(u8::from(enforcing[i]));
                    out.push(SnapshotRecord {
                        run_id,
                        tick,
                        agent_id: i,
                        period: offset + tick,
                        variables: rows[i],
                        labels: labels[i],
                    });
                }
            }
        }
        Trace::new(trace)
    }
}

/// The model with its native decision rules, plus every snapshot.
pub fn run_original(config: &RebConfig) -> Result<(Trace, Vec<SnapshotRecord>)> {
    run_original_as(config, 0, 0)
}

pub(super) fn run_original_as(
    config: &RebConfig,
    run_id: usize,
    offset: usize,
) -> Result<(Trace, Vec<SnapshotRecord>)> {
    let mut world = World::new(config)?;
    let mut records = Vec::with_capacity(world.agents.len() * config.ticks);
    let trace = world.run(&Policy::Original, run_id, offset, Some(&mut records));
    Ok((trace, records))
}

/// The same engine with the three decisions taken by `rules`. Jailed
/// citizens still never move or riot, and cops keep their native movement.
pub fn run_evolved(config: &RebConfig, rules: &Rules) -> Result<Trace> {
    let policy = Policy::compile(rules)?;
    let mut world = World::new(config)?;
    Ok(world.run(&policy, 0, 0, None))
}
