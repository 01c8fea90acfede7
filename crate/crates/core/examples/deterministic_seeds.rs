//! Seeds and worker counts: the same master seed gives the same run on any
//! number of threads.
//!
//! ```text
//! cargo run --release --example deterministic_seeds
//! ```

use igss::gp::{evolve_with_workers, GpConfig};
use igss::hawkdove::{self, hd_fitness, make_reference, HdConfig, ReferenceSpec};
use igss::seed;
use rand::Rng;

fn main() -> igss::Result<()> {
    let a: u32 = seed::stream(42, &[1, 0]).gen();
    let again: u32 = seed::stream(42, &[1, 0]).gen();
    let b: u32 = seed::stream(42, &[1, 1]).gen();
    println!("stream(42, [1, 0]) starts {a} (again: {again}); stream(42, [1, 1]) starts {b}");

    let config = HdConfig { ticks: 50, ..Default::default() };
    let reference = make_reference(&ReferenceSpec::TwoTier { low: 50.0, high: 450.0, split: 0.5 }, &config)?;
    let gp = GpConfig { population_size: 80, max_generations: 10, seed: 9, ..Default::default() };
    let mut logs = Vec::new();
    for workers in [1, 2, 8] {
        let result = evolve_with_workers(&gp, &hawkdove::rule_grammar(), workers, |rule, ctx| {
            hd_fitness(rule, &reference, &config.with_seed(ctx.seed), 2)
        })?;
        let mut csv = Vec::new();
        result.write_log_csv(&mut csv)?;
        println!("{workers} workers: best {:.6e} `{}`", result.best_fitness, result.best_pruned);
        logs.push(csv);
    }
    println!("identical generation logs: {}", logs.windows(2).all(|w| w[0] == w[1]));
    Ok(())
}
