//! Run the rebellion model with its own rules and with substituted rules,
//! then compare the quiet, active and jailed series.
//!
//! ```text
//! cargo run --release --example rebellion_traces -- 3
//! ```

use igss::expr::parse_rule;
use igss::rebellion::{compare_traces, run_evolved, run_original, RebConfig, Rules};

fn main() -> igss::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let config = RebConfig { seed, ..Default::default() };
    let (original, _) = run_original(&config)?;

    let published = Rules {
        moves: parse_rule("0 >= jailTerm0 AND threshold < freeNeighborhood0")?,
        activation: parse_rule(
            "((movementTracker0 == 0 AND movementTracker1 == 1 OR active0 > 0) OR \
             governmentLegitimacy * governmentLegitimacy < perceivedHardship) AND \
             copsOnNeighborhood1 * estimatedArrestProbability1 == jailTerm1",
        )?,
        enforcement: parse_rule("breed == 1")?,
    };
    let evolved = run_evolved(&config, &published)?;
    let same = run_evolved(&config, &Rules::ground_truth())?;
    println!("ground-truth rules reproduce the model: {}", same == original);

    println!("tick  quiet active jailed | quiet active jailed");
    for (o, e) in original.rows().iter().zip(evolved.rows()) {
        println!(
            "{:>4} {:>6} {:>6} {:>6} | {:>5} {:>6} {:>6}",
            o.tick, o.quiet, o.active, o.jailed, e.quiet, e.active, e.jailed
        );
    }
    let summary = compare_traces(&original, &evolved)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    original.save_csv("trace_original.csv")?;
    evolved.save_csv("trace_evolved.csv")?;
    Ok(())
}
