//! Build classifier trees from class probabilities, with and without a
//! depth limit, and print their expected evaluation cost.
//!
//!     cargo run --example build_tree

use hiersvm::tree::{self, ActivityClass, TreeBuildConfig};

fn main() -> hiersvm::Result<()> {
    let rows: [(&str, [f64; 6]); 3] = [
        ("P1", [20.0, 20.0, 5.0, 5.0, 10.0, 40.0]),
        ("P4", [10.0, 10.0, 15.0, 15.0, 25.0, 25.0]),
        ("P5", [8.0, 10.0, 7.0, 12.0, 21.0, 42.0]),
    ];
    for (name, probs) in rows {
        let classes = ActivityClass::from_weights(&probs)?;
        let t = tree::build_unconstrained(&classes)?;
        println!(
            "{name}: depth {} E(I) {:>5} {}",
            t.depth(),
            tree::expected_instructions(&t),
            t.topology()
        );
    }

    let classes = ActivityClass::from_weights(&rows[0].1)?;
    for limit in [3, 4, 5] {
        let cfg = TreeBuildConfig {
            depth_limit: Some(limit),
            ..TreeBuildConfig::default()
        };
        let t = tree::build(&classes, &cfg)?;
        println!(
            "P1 limit {limit}: depth {} E(I) {:>5} {}",
            t.depth(),
            tree::expected_instructions(&t),
            t.topology()
        );
    }
    match tree::build_depth_limited(&classes, 2) {
        Err(e) => println!("P1 limit 2: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
