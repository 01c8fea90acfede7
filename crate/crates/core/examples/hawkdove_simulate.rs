//! Run the hawk-dove model with a few fixed rules and look at the wealth
//! they produce.
//!
//! ```text
//! cargo run --example hawkdove_simulate
//! ```

use igss::expr::parse_rule;
use igss::hawkdove::{self, histogram, HdConfig};
use igss::refdata::gini;

fn main() -> igss::Result<()> {
    let config = HdConfig::default();
    for text in [
        "1",
        "5",
        "9",
        "IF previousTook >= 1 THEN 1 ELSE 9",
        "IF agents >= 2 THEN 3 ELSE 9",
    ] {
        let rule = parse_rule(text)?;
        let dist = hawkdove::run(&config, &rule)?;
        let v = dist.values();
        println!(
            "{text:<38} min {:>5} max {:>5} gini {:.3}",
            v[0],
            v[v.len() - 1],
            gini(v).unwrap_or(0.0)
        );
        for bin in histogram(v, 5) {
            println!("    [{:>6.1}, {:>6.1}] {}", bin.bin_low, bin.bin_high, "#".repeat(bin.count));
        }
    }
    Ok(())
}
