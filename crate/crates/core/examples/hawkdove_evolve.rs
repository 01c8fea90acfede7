//! Evolve a hawk-dove rule against a hand-made wealth target.
//!
//! ```text
//! cargo run --release --example hawkdove_evolve -- equality
//! cargo run --release --example hawkdove_evolve -- two-tier
//! ```

use igss::gp::{evolve, GpConfig};
use igss::hawkdove::{self, hd_fitness, make_reference, HdConfig, ReferenceSpec};
use igss::expr::prune_rule_with_ranges;

fn main() -> igss::Result<()> {
    let target = std::env::args().nth(1).unwrap_or_else(|| "equality".into());
    let spec = match target.as_str() {
        "two-tier" => ReferenceSpec::TwoTier { low: 100.0, high: 900.0, split: 0.5 },
        "pareto" => ReferenceSpec::ParetoLike { shape: 1.16, mean: None },
        _ => ReferenceSpec::Equality { value: None },
    };
    let config = HdConfig::default();
    let reference = make_reference(&spec, &config)?;
    println!("target {spec:?}, gini {:.3}", reference.gini().unwrap_or(0.0));

    let gp = GpConfig {
        max_generations: 30,
        target_fitness: Some(1.0),
        seed: 3,
        ..Default::default()
    };
    let result = evolve(&gp, &hawkdove::rule_grammar(), |rule, ctx| {
        hd_fitness(rule, &reference, &config.with_seed(ctx.seed), 3)
    })?;
    println!("best fitness {:.6} after {} generations", result.best_fitness, result.log.len());
    println!("raw:    {}", result.best);
    println!("pruned: {}", prune_rule_with_ranges(&result.best, &hawkdove::ranges(&config))?);

    let outcome = hawkdove::run(&config, &result.best)?;
    println!("reference: {:?}", reference.values());
    println!("outcome:   {:?}", outcome.values());
    Ok(())
}
