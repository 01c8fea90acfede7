//! Record the rebellion reference dataset: every agent at every tick, with
//! its variables captured before the move, activation and arrest steps.
//!
//! ```text
//! cargo run --release --example rebellion_record -- reference.csv
//! ```

use igss::rebellion::{self, record_dataset, ClassifierData, Task};

fn main() -> igss::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "rebellion_reference.csv".into());
    let configs = rebellion::default_configs(0);
    for c in &configs {
        let (cops, citizens) = c.population();
        println!("legitimacy {:.2}: {cops} cops, {citizens} citizens, {} ticks", c.legitimacy, c.ticks);
    }
    let dataset = record_dataset(&configs)?;
    println!("{} rows x {} columns ({})", dataset.n_rows(), dataset.columns().len(), dataset.provenance());
    for task in Task::ALL {
        let data = ClassifierData::new(&dataset, task)?;
        let positives = data.labels().iter().filter(|&&l| l).count();
        println!("{:<13} {positives:>6} positive of {:>6} rows", task.label(), data.len());
    }
    dataset.save_csv(&out)?;
    println!("written to {out}");
    Ok(())
}
