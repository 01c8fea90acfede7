//! Hawk-dove resource contention.
//!
//! Agents sit on locations holding `resource` units (at most two agents per
//! location). Each tick every agent evaluates the evolved rule on its
//! situation and demands the result, clamped to `[0, resource]`. When the
//! demands on a location add up to more than its resource, everyone there
//! gets nothing; otherwise each agent receives its demand. Agents return to
//! the same location unless they received nothing, in which case they move.
//!
//! Rule variables, in slot order, are listed in [`VARIABLES`].

mod reference;
mod world;

use serde::{Deserialize, Serialize};

pub use reference::{histogram, make_reference, write_histogram, Bin, ReferenceSpec, WealthDistribution, COLUMN};
pub use world::{compile, placement_stream, run, run_compiled, HdAgent, HdWorld, TickOutcome};

use crate::error::{Error, Result};
use crate::expr::{CompiledRule, ConstantPool, Grammar, Rule, VarRanges};
use crate::gp::RuleGrammar;
use crate::refdata::mse;
use crate::seed;

pub const VARIABLES: [&str; 7] = [
    "resource",
    "agents",
    "previousTook",
    "previousResource",
    "previousAgents",
    "totalAgents",
    "totalResource",
];

const REPEAT_STREAM: u64 = 12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HdConfig {
    pub n_agents: usize,
    pub n_locations: usize,
    /// Resource on each location at the start of every tick.
    pub resource: f64,
    pub ticks: usize,
    pub seed: u64,
}

impl Default for HdConfig {
    fn default() -> Self {
        HdConfig {
            n_agents: 20,
            n_locations: 20,
            resource: 10.0,
            ticks: 100,
            seed: 0,
        }
    }
}

impl HdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents == 0 {
            return Err(Error::Config("n_agents must be positive".into()));
        }
        if self.n_locations * 2 < self.n_agents {
            return Err(Error::Config(format!(
                "{} locations hold at most {} agents, not {}",
                self.n_locations,
                self.n_locations * 2,
                self.n_agents
            )));
        }
        if self.ticks == 0 {
            return Err(Error::Config("ticks must be at least 1".into()));
        }
        if !(self.resource.is_finite() && self.resource >= 0.0) {
            return Err(Error::Config("resource must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        HdConfig { seed, ..self.clone() }
    }
}

/// Values every variable can take while a rule is evaluated. Agents see at
/// most one neighbour; totals only accumulate past receipts.
pub fn ranges(config: &HdConfig) -> VarRanges {
    let r = config.resource;
    VarRanges::new()
        .with_integral("resource", r, r)
        .with_integral("agents", 1.0, 2.0)
        .with_integral("previousTook", 0.0, r)
        .with_integral("previousResource", 0.0, r)
        .with_integral("previousAgents", 0.0, 2.0)
        .with_integral("totalAgents", config.n_agents as f64, config.n_agents as f64)
        .with_integral("totalResource", 0.0, r * config.ticks as f64)
        .with_ordering("previousTook", "totalResource")
}

/// `IF condition THEN take a ELSE take b` over the model variables, with
/// small integer constants. Actions favour constants.
pub fn rule_grammar() -> RuleGrammar {
    let constants = ConstantPool::Integers { min: 0, max: 9 };
    RuleGrammar::conditional(
        Grammar::new(VARIABLES, constants.clone()),
        Grammar::new(VARIABLES, constants).with_constant_probability(0.9),
    )
}

/// Seed of repeat `r` for a fitness evaluation keyed by `seed`.
pub fn repeat_seed(seed: u64, r: usize) -> u64 {
    seed::derive(seed, &[REPEAT_STREAM, r as u64])
}

/// `1 / (1 + mean MSE)` between the sorted outcome of `n_repeats` runs
/// (seeds from [`repeat_seed`]) and the sorted reference.
pub fn hd_fitness(rule: &Rule, reference: &WealthDistribution, config: &HdConfig, n_repeats: usize) -> Result<f64> {
    let compiled = compile(rule).map_err(|e| Error::in_rule(rule, e))?;
    hd_fitness_compiled(&compiled, reference, config, n_repeats)
}

pub fn hd_fitness_compiled(
    rule: &CompiledRule,
    reference: &WealthDistribution,
    config: &HdConfig,
    n_repeats: usize,
) -> Result<f64> {
    if reference.len() != config.n_agents {
        return Err(Error::LengthMismatch {
            left: reference.len(),
            right: config.n_agents,
        });
    }
    if n_repeats == 0 {
        return Err(Error::Config("n_repeats must be at least 1".into()));
    }
    let mut total = 0.0;
    for r in 0..n_repeats {
        let outcome = run_compiled(&config.with_seed(repeat_seed(config.seed, r)), rule)?;
        total += mse(outcome.values(), reference.values())?;
    }
    Ok(1.0 / (1.0 + total / n_repeats as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{equivalent_sampled, parse_rule, prune_rule_with_ranges};
    use crate::refdata::gini;
    use crate::Expr;

    fn take(x: f64) -> Rule {
        Rule::bare(Expr::Const(x))
    }

    #[test]
    fn take_one_is_flat() {
        let d = run(&HdConfig::default(), &take(1.0)).unwrap();
        assert!(d.values().iter().all(|&v| v == 100.0));
        let hist = histogram(d.values(), 10);
        assert_eq!(hist.len(), 1);
        assert_eq!(hist[0].count, 20);
    }

    #[test]
    fn full_demands_always_conflict_when_paired() {
        let cfg = HdConfig { n_agents: 2, n_locations: 1, ..Default::default() };
        let mut world = HdWorld::new(&cfg).unwrap();
        let rule = compile(&take(10.0)).unwrap();
        let mut rng = placement_stream(0);
        for _ in 0..5 {
            let out = world.step(&rule, &mut rng);
            assert_eq!(out.receipts, vec![0.0, 0.0]);
            assert_eq!(out.conflicts, 1);
        }
    }

    #[test]
    fn zero_receipt_moves_agent() {
        let cfg = HdConfig { n_agents: 4, n_locations: 3, ..Default::default() };
        let mut world = HdWorld::new(&cfg).unwrap();
        let rule = compile(&parse_rule("IF agents >= 2 THEN 9 ELSE 1").unwrap()).unwrap();
        let mut rng = placement_stream(3);
        let mut last = world.step(&rule, &mut rng);
        for _ in 0..30 {
            let out = world.step(&rule, &mut rng);
            for id in 0..4 {
                if last.receipts[id] == 0.0 {
                    assert_ne!(out.locations[id], last.locations[id]);
                } else {
                    assert_eq!(out.locations[id], last.locations[id]);
                }
            }
            last = out;
        }
    }

    #[test]
    fn conservation_and_capacity() {
        let g = rule_grammar();
        let mut rng = seed::stream(8, &[]);
        for _ in 0..30 {
            let rule = g.random_rule(&mut rng);
            let cfg = HdConfig { n_agents: 15, n_locations: 8, ticks: 40, ..Default::default() };
            let mut world = HdWorld::new(&cfg).unwrap();
            let compiled = compile(&rule).unwrap();
            let mut sums = vec![0.0; 15];
            let mut prng = placement_stream(1);
            for _ in 0..cfg.ticks {
                let out = world.step(&compiled, &mut prng);
                let mut occ = vec![0; 8];
                for (id, &l) in out.locations.iter().enumerate() {
                    occ[l] += 1;
                    let got = out.receipts[id];
                    assert!((0.0..=cfg.resource).contains(&got));
                    sums[id] += got;
                }
                assert!(occ.iter().all(|&o| o <= 2));
            }
            for a in world.agents() {
                assert_eq!(a.total_resource, sums[a.id]);
            }
        }
    }

    #[test]
    fn deterministic_runs() {
        let rule = parse_rule("IF previousTook >= 1 THEN 1 ELSE 9").unwrap();
        let cfg = HdConfig { seed: 5, ..Default::default() };
        assert_eq!(run(&cfg, &rule).unwrap(), run(&cfg, &rule).unwrap());
    }

    #[test]
    fn fitness_of_constant_rules() {
        let cfg = HdConfig::default();
        let flat = make_reference(&ReferenceSpec::Equality { value: None }, &cfg).unwrap();
        assert_eq!(hd_fitness(&take(1.0), &flat, &cfg, 3).unwrap(), 1.0);
        let zero = hd_fitness(&take(0.0), &flat, &cfg, 3).unwrap();
        assert_eq!(zero, 1.0 / (1.0 + 100.0 * 100.0));
        let short = WealthDistribution::new(vec![1.0; 3]);
        assert!(matches!(hd_fitness(&take(1.0), &short, &cfg, 1), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn smoother_variant_is_unequal() {
        let rule = parse_rule("IF previousTook >= 1 AND agents >= 1 THEN 1 ELSE 9").unwrap();
        let d = run(&HdConfig::default(), &rule).unwrap();
        assert!(gini(d.values()).unwrap() > 0.0);
    }

    #[test]
    fn unknown_variable_is_a_schema_error() {
        let err = run(&HdConfig::default(), &parse_rule("wealth + 1").unwrap()).unwrap_err();
        assert!(matches!(err.root(), Error::Schema { .. }), "{err}");
    }

    #[test]
    fn range_pruning_keeps_fitness() {
        let cfg = HdConfig { ticks: 30, ..Default::default() };
        let reference = make_reference(&ReferenceSpec::TwoTier { low: 30.0, high: 270.0, split: 0.5 }, &cfg).unwrap();
        let r = ranges(&cfg);
        let g = rule_grammar();
        let mut rng = seed::stream(21, &[]);
        for _ in 0..40 {
            let rule = g.random_rule(&mut rng);
            let pruned = prune_rule_with_ranges(&rule, &r).unwrap();
            assert!(equivalent_sampled(&rule, &pruned, &r, 50, &mut rng), "{rule} => {pruned}");
            assert_eq!(
                hd_fitness(&rule, &reference, &cfg, 2).unwrap(),
                hd_fitness(&pruned, &reference, &cfg, 2).unwrap(),
                "{rule} => {pruned}"
            );
        }
    }
}
