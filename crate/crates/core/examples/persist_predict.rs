//! Trains a pipeline, saves it as JSON, reloads it and checks that the
//! reloaded copy scores every utterance bit for bit the same.
//!
//!     cargo run --release --example persist_predict

use intentgrid::classifiers::{ModelKind, TrainConfig};
use intentgrid::data::{generate_codemix, stratified_split};
use intentgrid::encoders::{EncoderResources, EncoderSpec};
use intentgrid::harness::{evaluate, fit_pipeline, Pipeline};

fn main() -> intentgrid::Result<()> {
    let ds = generate_codemix(3, 80);
    let (train, test) = stratified_split(&ds, 0.2, 3)?;
    let pipeline = fit_pipeline(
        &train,
        &EncoderSpec::Tfidf,
        ModelKind::Ffnn,
        &TrainConfig::default(),
        &mut EncoderResources::new(3),
        3,
    )?;

    let path = std::env::temp_dir().join("intentgrid-ffnn.json");
    pipeline.save(&path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    let loaded = Pipeline::load(&path)?;
    println!("saved {} ({size} bytes)", path.display());

    let same = test.utterances().all(|u| {
        let (a, b) = (pipeline.predict_scores(u), loaded.predict_scores(u));
        a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits())
    });
    println!("reloaded scores identical: {same}");

    let report = evaluate(&loaded.predict_all(&test), &test.label_strings(), ds.labels())?;
    println!("held-out macro-F1 {:.4}", report.macro_f1);
    for text in ["kal delhi ka mausam kaisa rahega", "play some arijit singh songs", "book a table for 2 tonight"] {
        println!("{}\t{text}", loaded.predict_text(text));
    }
    Ok(())
}
