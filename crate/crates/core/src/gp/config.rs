use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Knobs of the generational engine. Every field has a default so partial
/// config files are accepted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    pub population_size: usize,
    /// Number of generations logged, counting the initial population.
    pub max_generations: usize,
    pub p_reproduce: f64,
    pub p_mutate: f64,
    pub p_crossover: f64,
    pub elitism: usize,
    pub max_depth: usize,
    /// Depth cap for subtrees grown by mutation.
    pub mutation_depth: usize,
    pub seed: u64,
    pub target_fitness: Option<f64>,
    /// Stop after this many generations without a new best.
    pub stagnation_limit: Option<usize>,
    pub hall_of_fame: usize,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            population_size: 200,
            max_generations: 50,
            p_reproduce: 0.1,
            p_mutate: 0.2,
            p_crossover: 0.7,
            elitism: 1,
            max_depth: 8,
            mutation_depth: 4,
            seed: 0,
            target_fitness: None,
            stagnation_limit: None,
            hall_of_fame: 10,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.population_size < 2 {
            return fail("population_size must be at least 2");
        }
        let probs = [self.p_reproduce, self.p_mutate, self.p_crossover];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return fail("operator probabilities must lie in [0, 1]");
        }
        if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return fail("p_reproduce + p_mutate + p_crossover must equal 1");
        }
        if self.elitism >= self.population_size {
            return fail("elitism must be smaller than population_size");
        }
        if self.max_depth == 0 || self.mutation_depth == 0 {
            return fail("max_depth and mutation_depth must be at least 1");
        }
        if self.target_fitness.is_some_and(|t| !t.is_finite()) {
            return fail("target_fitness must be finite");
        }
        Ok(())
    }
}
