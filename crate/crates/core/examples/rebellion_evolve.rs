//! Evolve one rebellion decision rule as a classifier of the recorded
//! labels, scored by balanced accuracy.
//!
//! ```text
//! cargo run --release --example rebellion_evolve -- C
//! ```

use igss::gp::{evolve, GpConfig};
use igss::rebellion::{self, classify_fitness, record_dataset, ClassifierData, Metric, Task};

fn main() -> igss::Result<()> {
    let task = std::env::args()
        .nth(1)
        .and_then(|c| Task::from_code(&c))
        .unwrap_or(Task::Move);
    let dataset = record_dataset(&rebellion::default_configs(0))?;
    let data = ClassifierData::new(&dataset, task)?;
    let truth = classify_fitness(&task.ground_truth(), &data, Metric::BalancedAccuracy)?;
    println!("task {}: {} rows, ground truth `{}` scores {truth}", task.code(), data.len(), task.ground_truth());

    let gp = GpConfig {
        max_generations: 30,
        target_fitness: Some(1.0),
        seed: 1,
        ..Default::default()
    };
    let result = evolve(&gp, &task.grammar(), |rule, _| classify_fitness(rule, &data, Metric::BalancedAccuracy))?;
    for rec in &result.log {
        println!("gen {:>3} best {:.4} mean {:.4}", rec.generation, rec.best_fitness, rec.mean_fitness);
    }
    let plain = classify_fitness(&result.best, &data, Metric::Accuracy)?;
    println!("best balanced accuracy {:.4} (plain accuracy {plain:.4})", result.best_fitness);
    for e in result.hall_of_fame.iter().take(3) {
        println!("{:.4}  {}", e.fitness, e.pruned);
    }
    Ok(())
}
