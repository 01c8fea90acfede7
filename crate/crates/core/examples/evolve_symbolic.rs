//! The genetic programming engine on a toy target: find a rule whose value
//! matches `x * x + y` on a grid of points.
//!
//! ```text
//! cargo run --release --example evolve_symbolic -- 7
//! ```

use igss::expr::{CompiledRule, ConstantPool};
use igss::gp::{evolve, GpConfig, RuleGrammar};
use igss::Grammar;

fn main() -> igss::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let points: Vec<[f64; 2]> = (-4..=4)
        .flat_map(|x| (-4..=4).map(move |y| [x as f64, y as f64]))
        .collect();
    let target: Vec<f64> = points.iter().map(|[x, y]| x * x + y).collect();

    let grammar = RuleGrammar::bare(Grammar::new(["x", "y"], ConstantPool::Integers { min: 0, max: 3 }));
    let config = GpConfig {
        population_size: 300,
        max_generations: 40,
        target_fitness: Some(1.0),
        seed,
        ..Default::default()
    };
    let result = evolve(&config, &grammar, |rule, _| {
        let compiled = CompiledRule::compile_with_names(rule, &["x", "y"])?;
        let err: f64 = points
            .iter()
            .zip(&target)
            .map(|(p, t)| (compiled.eval(p) - t).powi(2))
            .sum::<f64>()
            / points.len() as f64;
        Ok(if err.is_finite() { 1.0 / (1.0 + err) } else { 0.0 })
    })?;

    for rec in result.log.iter().step_by(5) {
        println!("gen {:>3}  best {:.4}  mean {:.4}  {}", rec.generation, rec.best_fitness, rec.mean_fitness, rec.best_rule);
    }
    println!(
        "\nstopped: {:?} after {} evaluations, best fitness {:.4}",
        result.stop_reason, result.evaluations, result.best_fitness
    );
    println!("best:   {}\npruned: {}", result.best, result.best_pruned);
    Ok(())
}
