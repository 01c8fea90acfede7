use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{GpConfig, Individual};
use crate::error::{Error, Result};
use crate::expr::{grow, random_expr, Grammar, Rule};
use crate::seed;

/// Shape of the evolved genome: a bare condition, or
/// `IF condition THEN action ELSE action` with its own action primitives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleGrammar {
    pub condition: Grammar,
    #[serde(default)]
    pub action: Option<Grammar>,
}

/// Attempts per genetic operation before the parent is copied unchanged.
pub const MAX_ATTEMPTS: usize = 10;

pub(super) const INIT_STREAM: u64 = 1;

impl RuleGrammar {
    pub fn bare(condition: Grammar) -> Self {
        RuleGrammar {
            condition,
            action: None,
        }
    }

    pub fn conditional(condition: Grammar, action: Grammar) -> Self {
        RuleGrammar {
            condition,
            action: Some(action),
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.condition.max_depth = depth;
        if let Some(a) = &mut self.action {
            a.max_depth = depth;
        }
        self
    }

    pub fn max_depth(&self) -> usize {
        self.condition.max_depth
    }

    pub fn validate(&self) -> Result<()> {
        self.condition.validate()?;
        self.action.as_ref().map_or(Ok(()), Grammar::validate)
    }

    /// Grammar of tree `part` (0 = condition, then the actions).
    fn part(&self, part: usize) -> &Grammar {
        match (part, &self.action) {
            (0, _) | (_, None) => &self.condition,
            (_, Some(a)) => a,
        }
    }

    pub fn random_rule<R: Rng + ?Sized>(&self, rng: &mut R) -> Rule {
        let condition = random_expr(&self.condition, rng);
        match &self.action {
            None => Rule::bare(condition),
            Some(a) => {
                let then_action = random_expr(a, rng);
                Rule::if_then_else(condition, then_action, random_expr(a, rng))
            }
        }
    }
}

/// Maps a rule-wide preorder index to (tree, index within tree).
fn locate(rule: &Rule, mut index: usize) -> (usize, usize) {
    for (t, tree) in rule.trees().iter().enumerate() {
        if index < tree.size() {
            return (t, index);
        }
        index -= tree.size();
    }
    panic!("node index out of range")
}

fn is_condition(part: usize) -> bool {
    part == 0
}

/// Roulette-wheel pick over non-negative weights; uniform when all are zero.
pub struct Selector {
    wheel: Option<WeightedIndex<f64>>,
    len: usize,
}

impl Selector {
    pub fn new(fitness: &[f64]) -> Result<Self> {
        if fitness.is_empty() {
            return Err(Error::Config("cannot select from an empty population".into()));
        }
        Ok(Selector {
            wheel: WeightedIndex::new(fitness).ok(),
            len: fitness.len(),
        })
    }

    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.wheel {
            Some(w) => w.sample(rng),
            None => rng.gen_range(0..self.len),
        }
    }
}

pub fn select_proportional<R: Rng + ?Sized>(fitness: &[f64], rng: &mut R) -> Result<usize> {
    Ok(Selector::new(fitness)?.pick(rng))
}

/// Replaces one uniformly chosen node with a grown subtree that fits the
/// remaining depth budget.
pub fn mutate<R: Rng + ?Sized>(rule: &Rule, grammar: &RuleGrammar, mutation_depth: usize, rng: &mut R) -> Rule {
    let max_depth = grammar.max_depth();
    for _ in 0..MAX_ATTEMPTS {
        let (part, index) = locate(rule, rng.gen_range(0..rule.size()));
        let mut child = rule.clone();
        let tree = &mut child.trees_mut()[part];
        let level = tree.node_level(index).expect("index within tree");
        let budget = (max_depth + 1).saturating_sub(level).min(mutation_depth);
        if budget == 0 {
            continue;
        }
        let fresh = grow(grammar.part(part), budget, rng);
        tree.replace_node(index, fresh);
        if child.depth() <= max_depth {
            return child;
        }
    }
    rule.clone()
}

/// Swaps one uniformly chosen subtree of `a` with one of `b` taken from a
/// tree of the same kind (condition or action). No depth check.
pub fn exchange<R: Rng + ?Sized>(a: &Rule, b: &Rule, rng: &mut R) -> (Rule, Rule) {
    let (pa, ia) = locate(a, rng.gen_range(0..a.size()));
    let candidates: Vec<(usize, usize)> = b
        .trees()
        .iter()
        .enumerate()
        .filter(|(p, _)| is_condition(*p) == is_condition(pa))
        .flat_map(|(p, t)| (0..t.size()).map(move |i| (p, i)))
        .collect();
    if candidates.is_empty() {
        return (a.clone(), b.clone());
    }
    let (pb, ib) = candidates[rng.gen_range(0..candidates.len())];
    let mut ca = a.clone();
    let mut cb = b.clone();
    let from_b = b.trees()[pb].node(ib).expect("index within tree").clone();
    let from_a = ca.trees_mut()[pa].replace_node(ia, from_b).expect("index within tree");
    cb.trees_mut()[pb].replace_node(ib, from_a);
    (ca, cb)
}

/// Subtree crossover with depth rejection.
pub fn crossover<R: Rng + ?Sized>(a: &Rule, b: &Rule, max_depth: usize, rng: &mut R) -> (Rule, Rule) {
    for _ in 0..MAX_ATTEMPTS {
        let (ca, cb) = exchange(a, b, rng);
        if ca.depth() <= max_depth && cb.depth() <= max_depth {
            return (ca, cb);
        }
    }
    (a.clone(), b.clone())
}

pub fn init_population(config: &GpConfig, grammar: &RuleGrammar) -> Result<Vec<Individual>> {
    config.validate()?;
    let grammar = grammar.clone().with_max_depth(config.max_depth);
    grammar.validate()?;
    Ok((0..config.population_size)
        .map(|slot| {
            let mut rng = seed::stream(config.seed, &[INIT_STREAM, slot as u64]);
            Individual::new(grammar.random_rule(&mut rng))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{ConstantPool, Expr};

    fn grammar() -> RuleGrammar {
        RuleGrammar::conditional(
            Grammar::new(["a", "b", "c"], ConstantPool::Integers { min: 0, max: 9 }),
            Grammar::new(["a"], ConstantPool::Integers { min: 0, max: 9 }),
        )
    }

    fn rates(fitness: &[f64], draws: usize) -> Vec<f64> {
        let mut rng = seed::stream(11, &[]);
        let sel = Selector::new(fitness).unwrap();
        let mut counts = vec![0usize; fitness.len()];
        for _ in 0..draws {
            counts[sel.pick(&mut rng)] += 1;
        }
        counts.iter().map(|&c| c as f64 / draws as f64).collect()
    }

    #[test]
    fn proportional_rates() {
        let close = |got: Vec<f64>, want: &[f64]| {
            got.iter().zip(want).all(|(g, w)| (g - w).abs() <= 0.01)
        };
        assert!(close(rates(&[3.0, 1.0], 100_000), &[0.75, 0.25]));
        assert!(close(rates(&[1.0; 4], 100_000), &[0.25; 4]));
        assert!(close(rates(&[0.0, 0.0], 100_000), &[0.5, 0.5]));
    }

    #[test]
    fn empty_population_is_an_error() {
        assert!(select_proportional(&[], &mut seed::stream(0, &[])).is_err());
    }

    #[test]
    fn population_count_and_determinism() {
        let cfg = GpConfig { population_size: 4, ..Default::default() };
        let a = init_population(&cfg, &grammar()).unwrap();
        assert_eq!(a.len(), 4);
        assert!(a.iter().all(|i| i.fitness.is_none()));
        let b = init_population(&cfg, &grammar()).unwrap();
        assert_eq!(a, b);
        let bad = GpConfig { population_size: 1, ..Default::default() };
        assert!(init_population(&bad, &grammar()).is_err());
    }

    #[test]
    fn single_constant_mutates_whole_tree() {
        let g = RuleGrammar::bare(Grammar::new(["x"], ConstantPool::None));
        let rule = Rule::bare(Expr::Const(4.0));
        let mut rng = seed::stream(2, &[]);
        for _ in 0..50 {
            let m = mutate(&rule, &g, 4, &mut rng);
            assert!(m.condition.variables().contains("x"), "{m}");
        }
    }

    #[test]
    fn mutation_respects_depth_and_seed() {
        let g = grammar();
        let mut rng = seed::stream(3, &[]);
        for _ in 0..1000 {
            let r = g.random_rule(&mut rng);
            let m = mutate(&r, &g, 4, &mut rng);
            assert!(m.depth() <= g.max_depth());
        }
        let r = g.random_rule(&mut seed::stream(9, &[]));
        let m1 = mutate(&r, &g, 4, &mut seed::stream(10, &[]));
        let m2 = mutate(&r, &g, 4, &mut seed::stream(10, &[]));
        assert_eq!(m1, m2);
    }

    #[test]
    fn crossover_of_single_nodes_returns_parents() {
        let a = Rule::bare(Expr::Const(1.0));
        let b = Rule::bare(Expr::Const(2.0));
        let (ca, cb) = crossover(&a, &b, 8, &mut seed::stream(0, &[]));
        assert_eq!((ca, cb), (b, a));
    }

    #[test]
    fn exchange_conserves_nodes() {
        let g = grammar();
        let mut rng = seed::stream(4, &[]);
        for _ in 0..1000 {
            let a = g.random_rule(&mut rng);
            let b = g.random_rule(&mut rng);
            let (ca, cb) = exchange(&a, &b, &mut rng);
            assert_eq!(ca.size() + cb.size(), a.size() + b.size());
        }
    }

    #[test]
    fn crossover_is_seeded_and_bounded() {
        let g = grammar();
        let mut rng = seed::stream(5, &[]);
        let a = g.random_rule(&mut rng);
        let b = g.random_rule(&mut rng);
        let x = crossover(&a, &b, 8, &mut seed::stream(6, &[]));
        let y = crossover(&a, &b, 8, &mut seed::stream(6, &[]));
        assert_eq!(x, y);
        assert!(x.0.depth() <= 8 && x.1.depth() <= 8);
    }
}
