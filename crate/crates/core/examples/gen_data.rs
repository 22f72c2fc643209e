//! Generates the synthetic code-mix corpus, splits it and shows a few rows.
//!
//!     cargo run --release --example gen_data

use intentgrid::data::{build_vocabulary, generate_codemix, stratified_split};

fn main() -> intentgrid::Result<()> {
    let ds = generate_codemix(1, 200);
    println!("{} utterances, digest {}", ds.len(), &ds.digest()[..16]);
    for (label, n) in ds.count_by_label() {
        println!("  {label:<22}{n}");
    }

    let (train, test) = stratified_split(&ds, 0.2, 1)?;
    println!("train {} / test {}", train.len(), test.len());
    println!("vocabulary (train): {} types", build_vocabulary(&train, 1).len());

    for r in ds.records().iter().step_by(200).take(7) {
        println!("{}\t{}", r.label, r.utterance.text);
    }
    Ok(())
}
