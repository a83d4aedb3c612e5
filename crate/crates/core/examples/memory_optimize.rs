//! Train a tree, then share support vectors within one radius and compare
//! stored vectors and accuracy before and after.
//!
//!     cargo run --example memory_optimize [epsilon]

use hiersvm::data::{stratified_split, synth_generate, SynthSpec};
use hiersvm::eval::accuracy;
use hiersvm::moc;
use hiersvm::tree::{self, ActivityClass};
use hiersvm::TrainConfig;

fn main() -> hiersvm::Result<()> {
    let epsilon: f64 = std::env::args()
        .nth(1)
        .map(|a| a.parse().expect("epsilon must be a number"))
        .unwrap_or(2.0);

    let ds = synth_generate(&SynthSpec::new(6, 8, 7))?;
    let split = stratified_split(&ds, 7)?;
    let classes = ActivityClass::from_weights(&[20.0, 20.0, 5.0, 5.0, 10.0, 40.0])?;
    let shape = tree::build_unconstrained(&classes)?;
    let trained = tree::attach_classifiers(&shape, &split.train, &TrainConfig::default())?;

    let isvs = moc::collect_initial_svs(&trained)?;
    let pool = moc::candidate_pool(&split.train.features, &isvs);
    let cov = moc::enumerate_secondary(&isvs, &pool, epsilon)?;
    let sel = moc::greedy_moc(&cov)?;
    let rebuilt = moc::rebuild_models(&trained, &sel, &pool, &split.train)?;
    let report = moc::savings(&trained, &sel)?;

    println!("epsilon         {epsilon}");
    println!("ISVs            {}", isvs.len());
    println!("candidates      {}", pool.len());
    println!("stored vectors  {} -> {}", report.initial_stored, report.final_stored);
    println!("savings         {:.2}%", report.savings_pct);
    println!("shared vectors  {}", report.overlap_count);
    println!(
        "accuracy        {:.4} -> {:.4}",
        accuracy(&trained, &split.test)?,
        accuracy(&rebuilt, &split.test)?
    );
    Ok(())
}
