//! Raw sensor CSV to windowed features: synthesize a short recording,
//! round-trip it through CSV and extract per-window statistics.
//!
//!     cargo run --example csv_pipeline

use hiersvm::data::{self, CsvSchema, RawRecording, WindowSpec};

fn recording() -> RawRecording {
    let schema = CsvSchema::default();
    let rate = schema.sample_rate;
    let n = 600;
    let mut text = format!("t,{},label\n", schema.channels.join(","));
    for i in 0..n {
        let t = i as f64 / rate;
        let label = if i < n / 2 { 0 } else { 1 };
        let amp = if label == 0 { 0.2 } else { 1.5 };
        let values: Vec<String> = (0..schema.channels.len())
            .map(|c| format!("{:.4}", amp * (t * (1.0 + c as f64)).sin()))
            .collect();
        text.push_str(&format!("{t:.4},{},{label}\n", values.join(",")));
    }
    data::parse_csv(&text, &schema).expect("generated CSV parses")
}

fn main() -> hiersvm::Result<()> {
    let rec = recording();
    let text = data::to_csv_string(&rec);
    let back = data::parse_csv(&text, &CsvSchema::default())?;
    assert_eq!(back, rec);

    let spec = WindowSpec::for_rate(rec.sample_rate);
    let ds = data::extract_features(&rec, &spec)?;
    println!(
        "{} samples at {} Hz, window {} stride {}",
        rec.len(),
        rec.sample_rate,
        spec.length,
        spec.stride
    );
    println!("{} windows, {} features each, classes {:?}", ds.len(), ds.dimension(), ds.class_ids());
    print!("{}", ds.to_csv_string().lines().take(3).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
