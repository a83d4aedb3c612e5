//! Sweep the sharing radius on the seeded six-class dataset and print the
//! CSV report.
//!
//!     cargo run --example sweep

use hiersvm::data::{stratified_split, synth_generate, SynthSpec};
use hiersvm::eval::{self, SweepConfig};
use hiersvm::tree::{self, ActivityClass};
use hiersvm::TrainConfig;

fn main() -> hiersvm::Result<()> {
    let ds = synth_generate(&SynthSpec::new(6, 8, 7))?;
    let split = stratified_split(&ds, 7)?;
    let classes = ActivityClass::from_weights(&[20.0, 20.0, 5.0, 5.0, 10.0, 40.0])?;
    let shape = tree::build_unconstrained(&classes)?;
    let trained = tree::attach_classifiers(&shape, &split.train, &TrainConfig::default())?;

    let cfg = SweepConfig {
        epsilon_grid: eval::default_grid(&trained, 11)?,
        ..SweepConfig::default()
    };
    let report = eval::sweep_epsilon(&trained, &split, &cfg)?;
    print!("{}", eval::report_csv(&report));
    Ok(())
}
