//! Compare tree structures induced by different class distributions over
//! one dataset: expected cost, initial overlap and best savings.
//!
//!     cargo run --example compare_structures

use hiersvm::data::{synth_generate, SynthSpec};
use hiersvm::eval::{self, SweepConfig};
use hiersvm::TrainConfig;

fn main() -> hiersvm::Result<()> {
    let ds = synth_generate(&SynthSpec::new(6, 8, 7))?;
    let distributions = vec![
        vec![20.0, 20.0, 5.0, 5.0, 10.0, 40.0],
        vec![10.0, 10.0, 15.0, 15.0, 25.0, 25.0],
        vec![8.0, 10.0, 7.0, 12.0, 21.0, 42.0],
    ];
    let cfg = SweepConfig {
        epsilon_grid: (0..=10).map(|k| k as f64 * 0.5).collect(),
        ..SweepConfig::default()
    };
    let results = eval::compare_structures(&distributions, &ds, &cfg, &TrainConfig::default())?;

    println!("{:<32} {:>5} {:>6} {:>8} {:>9}", "distribution", "depth", "E(I)", "overlap", "best sav");
    for (probs, (stats, report)) in distributions.iter().zip(&results) {
        let best = report
            .records
            .iter()
            .filter(|r| r.meets_floor)
            .map(|r| r.savings_pct)
            .fold(0.0, f64::max);
        println!(
            "{:<32} {:>5} {:>6} {:>7.2}% {:>8.2}%",
            format!("{probs:?}"),
            stats.depth,
            stats.expected_instructions,
            stats.initial_overlap_pct.unwrap_or(0.0),
            best
        );
    }
    Ok(())
}
