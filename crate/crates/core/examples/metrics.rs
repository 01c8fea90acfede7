//! Scoring helpers shared by the models.
//!
//! ```text
//! cargo run --example metrics
//! ```

use igss::refdata::{balanced_accuracy, gini, mse, Confusion};

fn main() -> igss::Result<()> {
    println!("mse([1,2],[2,4]) = {}", mse(&[1.0, 2.0], &[2.0, 4.0])?);

    let mut c = Confusion::default();
    for i in 0..10 {
        c.add(i < 8, true);
    }
    for i in 0..100 {
        c.add(i >= 90, false);
    }
    println!("{c:?}: balanced {} plain {}", c.balanced_accuracy(), c.accuracy());

    // Predicting the majority class looks good on accuracy only.
    let labels: Vec<bool> = (0..100).map(|i| i < 5).collect();
    let lazy = vec![false; 100];
    let lazy_c = Confusion::tally(&lazy, &labels)?;
    println!(
        "always-no on 5% positives: balanced {} plain {}",
        balanced_accuracy(&lazy, &labels)?,
        lazy_c.accuracy()
    );

    for w in [vec![5.0; 4], vec![0.0, 0.0, 0.0, 1.0], vec![100.0, 100.0, 900.0, 900.0]] {
        println!("gini {w:?} = {}", gini(&w)?);
    }
    Ok(())
}
