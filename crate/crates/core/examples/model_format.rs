//! Serialize a trained tree in both layouts and read it back. Source
//! sample ids are not stored, so the round trip is checked on the text.
//!
//!     cargo run --example model_format

use hiersvm::data::{stratified_split, synth_generate, SynthSpec};
use hiersvm::format::{self, Layout};
use hiersvm::tree::{self, ActivityClass};
use hiersvm::TrainConfig;

fn main() -> hiersvm::Result<()> {
    let ds = synth_generate(&SynthSpec::new(3, 2, 7))?;
    let split = stratified_split(&ds, 7)?;
    let classes = ActivityClass::from_weights(&[50.0, 30.0, 20.0])?;
    let shape = tree::build_unconstrained(&classes)?;
    let trained = tree::attach_classifiers(&shape, &split.train, &TrainConfig::default())?;

    for layout in [Layout::PerNode, Layout::SharedPool] {
        let text = format::write_tree(&trained, layout);
        let back = format::read_tree(&text)?;
        assert_eq!(format::write_tree(&back, layout), text);
        println!("--- {layout:?}: {} lines", text.lines().count());
        for line in text.lines().take(8) {
            println!("{line}");
        }
    }
    Ok(())
}
