//! Train a single linear SVM on two seeded Gaussian blobs.
//!
//!     cargo run --example svm_blobs

use hiersvm::data::{synth_generate, SynthSpec};
use hiersvm::svm::{train_binary, TrainConfig};

fn main() -> hiersvm::Result<()> {
    let ds = synth_generate(&SynthSpec::new(2, 4, 7))?;
    let labels: Vec<i8> = ds.labels.iter().map(|&l| if l == 0 { 1 } else { -1 }).collect();

    let model = train_binary(&ds.features, &labels, &TrainConfig::default())?;

    let correct = ds
        .features
        .iter()
        .zip(&labels)
        .filter(|(x, &y)| (model.decision_value(x).unwrap() >= 0.0) == (y > 0))
        .count();
    println!("support vectors: {}", model.entries.len());
    println!("bias:            {:.6}", model.bias);
    println!("sum alpha*y:     {:.2e}", model.coefficient_sum());
    println!("train accuracy:  {}/{}", correct, ds.len());
    Ok(())
}
