//! Parse, render, evaluate and compile behaviour rules.
//!
//! ```text
//! cargo run --example expression_rules
//! ```

use igss::expr::{parse_rule, CompiledRule};
use igss::VarBindings;

fn main() -> igss::Result<()> {
    let rule = parse_rule("IF previousTook >= 1 AND agents < 2 THEN 1 ELSE resource / (agents - 1)")?;
    println!("rule:      {rule}");
    println!("size {}, depth {}, reads {:?}", rule.size(), rule.depth(), rule.variables());

    // Numbers coerce to booleans (nonzero is true) and back (1 or 0).
    let mixed = parse_rule("(agents AND previousTook) + 1")?;
    let alone = VarBindings::new().with("agents", 1.0).with("previousTook", 0.0);
    println!("{mixed} with previousTook = 0 -> {}", mixed.eval(&alone)?);

    // Division by zero is protected and yields 1.
    let crowded = VarBindings::new()
        .with("previousTook", 0.0)
        .with("agents", 1.0)
        .with("resource", 10.0);
    println!("{rule} on a lone first visit -> {}", rule.eval(&crowded)?);

    // Compiled form: variables resolve to slots of a flat row.
    let names = ["resource", "agents", "previousTook"];
    let compiled = CompiledRule::compile_with_names(&rule, &names)?;
    for row in [[10.0, 1.0, 0.0], [10.0, 2.0, 0.0], [10.0, 1.0, 4.0]] {
        println!("row {row:?} -> take {}", compiled.eval(&row));
    }

    match parse_rule("IF agents >= THEN 1") {
        Ok(_) => unreachable!(),
        Err(e) => println!("malformed rule: {e}"),
    }
    Ok(())
}
