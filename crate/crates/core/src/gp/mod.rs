//! Generational genetic programming over behaviour rules.
//!
//! Each generation is scored (in parallel), the best `elitism` individuals
//! are copied, and the remaining slots are filled by reproduction, mutation
//! or crossover of roulette-selected parents. All randomness comes from
//! streams keyed by (seed, generation, slot), so the outcome does not depend
//! on the number of workers.

mod config;
mod operators;

use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use config::GpConfig;
pub use operators::{crossover, exchange, init_population, mutate, select_proportional, RuleGrammar, Selector, MAX_ATTEMPTS};

use crate::error::{Error, Result};
use crate::expr::{prune_rule, Rule};
use crate::seed;

const BREED_STREAM: u64 = 2;
const FITNESS_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct Individual {
    pub genome: Rule,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genome: Rule) -> Self {
        Individual { genome, fitness: None }
    }
}

/// Passed to every fitness call. The seed is fixed for the whole run, so a
/// stochastic fitness sees common random numbers and stays a pure function
/// of the rule.
#[derive(Clone, Copy, Debug)]
pub struct EvalContext {
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub best_rule: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HallEntry {
    pub rule: Rule,
    pub pruned: Rule,
    pub fitness: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GenerationLimit,
    TargetReached,
    Stagnation,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct OperatorCounts {
    pub reproduce: usize,
    pub mutate: usize,
    pub crossover: usize,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub log: Vec<GenerationRecord>,
    /// Best distinct rules seen during the run, best first.
    pub hall_of_fame: Vec<HallEntry>,
    pub best: Rule,
    pub best_fitness: f64,
    pub best_pruned: Rule,
    pub seed: u64,
    /// Fitness function calls (cache hits excluded).
    pub evaluations: usize,
    pub stop_reason: StopReason,
    pub operator_counts: OperatorCounts,
    /// Final scored population.
    pub population: Vec<Individual>,
}

impl EvolutionResult {
    /// `generation,best_fitness,mean_fitness,best_rule`
    pub fn write_log_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for rec in &self.log {
            w.serialize(rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rule-file rendering: each entry as a comment with its fitness and raw
    /// text, followed by the pruned rule.
    pub fn hall_of_fame_text(&self) -> String {
        let mut s = String::new();
        for (rank, e) in self.hall_of_fame.iter().enumerate() {
            s += &format!("# {} fitness={} raw: {}\n{}\n", rank + 1, e.fitness, e.rule, e.pruned);
        }
        s
    }
}

struct Candidate {
    rule: Rule,
    fitness: f64,
    size: usize,
    first_seen: usize,
}

fn rank(a_fit: f64, a_size: usize, a_idx: usize, b_fit: f64, b_size: usize, b_idx: usize) -> std::cmp::Ordering {
    b_fit
        .total_cmp(&a_fit)
        .then(a_size.cmp(&b_size))
        .then(a_idx.cmp(&b_idx))
}

/// Runs on the global rayon pool.
pub fn evolve<F>(config: &GpConfig, grammar: &RuleGrammar, fitness: F) -> Result<EvolutionResult>
where
    F: Fn(&Rule, &EvalContext) -> Result<f64> + Sync,
{
    Engine::new(config, grammar, &fitness)?.run(None)
}

/// Like [`evolve`] on a dedicated pool of `workers` threads.
pub fn evolve_with_workers<F>(config: &GpConfig, grammar: &RuleGrammar, workers: usize, fitness: F) -> Result<EvolutionResult>
where
    F: Fn(&Rule, &EvalContext) -> Result<f64> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    Engine::new(config, grammar, &fitness)?.run(Some(&pool))
}

struct Engine<'a, F> {
    config: &'a GpConfig,
    grammar: RuleGrammar,
    fitness: &'a F,
    ctx: EvalContext,
    cache: HashMap<String, f64>,
    evaluations: usize,
    counts: OperatorCounts,
    seen: HashMap<String, Candidate>,
}

impl<'a, F> Engine<'a, F>
where
    F: Fn(&Rule, &EvalContext) -> Result<f64> + Sync,
{
    fn new(config: &'a GpConfig, grammar: &RuleGrammar, fitness: &'a F) -> Result<Self> {
        config.validate()?;
        let grammar = grammar.clone().with_max_depth(config.max_depth);
        grammar.validate()?;
        Ok(Engine {
            config,
            grammar,
            fitness,
            ctx: EvalContext {
                seed: seed::derive(config.seed, &[FITNESS_STREAM]),
            },
            cache: HashMap::new(),
            evaluations: 0,
            counts: OperatorCounts::default(),
            seen: HashMap::new(),
        })
    }

    fn run(mut self, pool: Option<&rayon::ThreadPool>) -> Result<EvolutionResult> {
        let generations = self.config.max_generations.max(1);
        let mut population = init_population(self.config, &self.grammar)?;
        let mut log = Vec::with_capacity(generations);
        let mut stop_reason = StopReason::GenerationLimit;
        let mut best_so_far = f64::NEG_INFINITY;
        let mut stale = 0usize;
        for generation in 0..generations {
            if generation > 0 {
                population = self.breed(&population, generation)?;
            }
            match pool {
                Some(p) => p.install(|| self.score(&mut population))?,
                None => self.score(&mut population)?,
            }
            let record = self.record(&population, generation);
            let best = record.best_fitness;
            log.push(record);

            if best > best_so_far {
                best_so_far = best;
                stale = 0;
            } else {
                stale += 1;
            }
            if self.config.target_fitness.is_some_and(|t| best >= t) {
                stop_reason = StopReason::TargetReached;
                break;
            }
            if self.config.stagnation_limit.is_some_and(|l| stale >= l) {
                stop_reason = StopReason::Stagnation;
                break;
            }
        }

        let mut ranked: Vec<Candidate> = self.seen.into_values().collect();
        ranked.sort_by(|a, b| rank(a.fitness, a.size, a.first_seen, b.fitness, b.size, b.first_seen));
        let best = ranked.first().expect("at least one generation scored");
        let (best_rule, best_fitness) = (best.rule.clone(), best.fitness);
        let hall_of_fame = ranked
            .into_iter()
            .take(self.config.hall_of_fame)
            .map(|c| HallEntry {
                pruned: prune_rule(&c.rule),
                rule: c.rule,
                fitness: c.fitness,
            })
            .collect();
        Ok(EvolutionResult {
            log,
            hall_of_fame,
            best_pruned: prune_rule(&best_rule),
            best: best_rule,
            best_fitness,
            seed: self.config.seed,
            evaluations: self.evaluations,
            stop_reason,
            operator_counts: self.counts,
            population,
        })
    }

    fn score(&mut self, population: &mut [Individual]) -> Result<()> {
        let texts: Vec<Option<String>> = population
            .iter()
            .map(|ind| ind.fitness.is_none().then(|| ind.genome.to_string()))
            .collect();
        let mut pending: Vec<(&str, &Rule)> = Vec::new();
        let mut queued: HashMap<&str, ()> = HashMap::new();
        for (ind, text) in population.iter().zip(&texts) {
            if let Some(t) = text {
                if !self.cache.contains_key(t) && queued.insert(t, ()).is_none() {
                    pending.push((t, &ind.genome));
                }
            }
        }
        let fitness = self.fitness;
        let ctx = self.ctx;
        let scores: Vec<Result<f64>> = pending
            .par_iter()
            .map(|(text, rule)| {
                let v = fitness(rule, &ctx).map_err(|e| Error::in_rule(text, e))?;
                if v.is_finite() && v >= 0.0 {
                    Ok(v)
                } else {
                    Err(Error::in_rule(text, Error::Data(format!("fitness must be finite and non-negative, got {v}"))))
                }
            })
            .collect();
        self.evaluations += pending.len();
        let resolved: Vec<(String, f64)> = pending
            .iter()
            .zip(scores)
            .map(|((t, _), s)| s.map(|v| (t.to_string(), v)))
            .collect::<Result<_>>()?;
        self.cache.extend(resolved);
        for (ind, text) in population.iter_mut().zip(texts) {
            if let Some(t) = text {
                ind.fitness = Some(self.cache[&t]);
            }
        }
        Ok(())
    }

    /// Logs the generation and feeds the hall of fame.
    fn record(&mut self, population: &[Individual], generation: usize) -> GenerationRecord {
        let fit: Vec<f64> = population.iter().map(|i| i.fitness.expect("scored")).collect();
        let best = self.ranking(population)[0];
        for (i, ind) in population.iter().enumerate() {
            let text = ind.genome.to_string();
            let order = generation * population.len() + i;
            self.seen.entry(text).or_insert_with(|| Candidate {
                rule: ind.genome.clone(),
                fitness: fit[i],
                size: ind.genome.size(),
                first_seen: order,
            });
        }
        GenerationRecord {
            generation,
            best_fitness: fit[best],
            mean_fitness: fit.iter().sum::<f64>() / fit.len() as f64,
            best_rule: population[best].genome.to_string(),
        }
    }

    /// Indices from best to worst: fitness, then smaller size, then position.
    fn ranking(&self, population: &[Individual]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..population.len()).collect();
        let key = |i: usize| (population[i].fitness.expect("scored"), population[i].genome.size());
        idx.sort_by(|&a, &b| {
            let (fa, sa) = key(a);
            let (fb, sb) = key(b);
            rank(fa, sa, a, fb, sb, b)
        });
        idx
    }

    fn breed(&mut self, population: &[Individual], generation: usize) -> Result<Vec<Individual>> {
        let n = self.config.population_size;
        let fit: Vec<f64> = population.iter().map(|i| i.fitness.expect("scored")).collect();
        let selector = Selector::new(&fit)?;
        let mut next: Vec<Individual> = self
            .ranking(population)
            .into_iter()
            .take(self.config.elitism)
            .map(|i| population[i].clone())
            .collect();
        let (p_rep, p_mut) = (self.config.p_reproduce, self.config.p_mutate);
        while next.len() < n {
            let slot = next.len() as u64;
            let mut rng = seed::stream(self.config.seed, &[BREED_STREAM, generation as u64, slot]);
            let u: f64 = rng.gen();
            let parent = &population[selector.pick(&mut rng)];
            if u < p_rep {
                self.counts.reproduce += 1;
                next.push(parent.clone());
            } else if u < p_rep + p_mut {
                self.counts.mutate += 1;
                let child = mutate(&parent.genome, &self.grammar, self.config.mutation_depth, &mut rng);
                next.push(Individual::new(child));
            } else {
                self.counts.crossover += 1;
                let other = &population[selector.pick(&mut rng)];
                let (a, b) = crossover(&parent.genome, &other.genome, self.grammar.max_depth(), &mut rng);
                next.push(Individual::new(a));
                if next.len() < n {
                    next.push(Individual::new(b));
                }
            }
        }
        Ok(next)
    }
}
