//! A small grid built in code: three encoders by four classifiers plus a
//! recurrent block, run in parallel and printed as tables.
//!
//!     cargo run --release --example grid_run [out-dir]

use intentgrid::classifiers::{ModelKind, TrainConfig};
use intentgrid::encoders::{EncoderSpec, SgnsConfig};
use intentgrid::harness::{
    run_grid, DatasetSource, EmbeddingSource, GridSpec, NamedClassifier, NamedEmbedding, NamedEncoder,
    NamedRecurrent,
};
use intentgrid::recurrent::{CellKind, SeqConfig};

fn main() -> intentgrid::Result<()> {
    let mut spec = GridSpec::new(5);
    spec.dataset = DatasetSource::Codemix {
        seed: 5,
        per_intent: 60,
    };
    let sg = SgnsConfig::with_dim(25);
    spec.encoders = vec![
        NamedEncoder { name: "Count".into(), spec: EncoderSpec::Count },
        NamedEncoder { name: "Tfidf-Lsa".into(), spec: EncoderSpec::TfidfLsa { rank: 50 } },
        NamedEncoder { name: "SG25-IdfAvg".into(), spec: EncoderSpec::SgnsIdfAvg(sg.clone()) },
    ];
    spec.classifiers = [ModelKind::LinearSvm, ModelKind::LogReg, ModelKind::Knn, ModelKind::Cosine]
        .into_iter()
        .map(|kind| NamedClassifier {
            name: kind.to_string(),
            kind,
            config: TrainConfig::default(),
        })
        .collect();
    let seq = SeqConfig {
        hidden: 32,
        ..Default::default()
    };
    spec.recurrent = [CellKind::Gru, CellKind::Lstm]
        .into_iter()
        .map(|kind| NamedRecurrent {
            name: kind.to_string(),
            kind,
            config: seq.clone(),
        })
        .collect();
    spec.recurrent_embeddings = vec![NamedEmbedding {
        name: "SG25".into(),
        source: EmbeddingSource::Sgns(sg),
    }];

    let report = run_grid(&spec, 0)?;
    println!("{}", report.classic.as_ref().unwrap().to_text("macro-F1 x100"));
    println!("{}", report.recurrent.as_ref().unwrap().to_text("macro-F1 x100, recurrent"));
    if let Some(dir) = std::env::args().nth(1) {
        report.write(&dir)?;
        println!("wrote results and manifest to {dir}");
    }
    Ok(())
}
