//! Reduce bloated evolved rules to their readable core.
//!
//! Plain pruning only uses algebra; range-aware pruning also knows what
//! values each model variable can take.
//!
//! ```text
//! cargo run --example prune_rules
//! ```

use igss::expr::{equivalent_sampled, parse_rule, prune_rule, prune_rule_with_ranges};
use igss::hawkdove::{self, HdConfig};
use igss::seed;

fn main() -> igss::Result<()> {
    let ranges = hawkdove::ranges(&HdConfig::default());
    let mut rng = seed::stream(1, &[]);
    let rules = [
        "IF (previousResource - previousResource) * (previousResource - previousResource) >= \
         (previousTook - resource) - (totalResource - agents) THEN 1",
        "IF (previousTook - totalAgents) != (agents AND previousTook) THEN 1 ELSE 9",
        "IF (previousTook - totalAgents != agents) AND previousTook THEN 1 ELSE 9",
        "IF NOT NOT (agents * 1 + 0 > 1) THEN 9 - 0 ELSE 3 * 1",
    ];
    for text in rules {
        let rule = parse_rule(text)?;
        let plain = prune_rule(&rule);
        let ranged = prune_rule_with_ranges(&rule, &ranges)?;
        let same = equivalent_sampled(&rule, &ranged, &ranges, 1000, &mut rng);
        println!("raw:    {rule}\nplain:  {plain}\nranged: {ranged}\nequivalent on 1000 samples: {same}\n");
    }
    Ok(())
}
