//! Order-sensitive toy task: recurrent models see token order, bag-of-words
//! models do not.
//!
//!     cargo run --release --example recurrent_order

use std::time::Instant;

use intentgrid::classifiers::{train_model, Classifier, ModelKind, TrainConfig};
use intentgrid::data::{build_vocabulary, generate_order_task, stratified_split};
use intentgrid::encoders::{fit_encoder, EmbeddingTable, Encoder, EncoderResources, EncoderSpec};
use intentgrid::harness::evaluate;
use intentgrid::recurrent::{train_sequence_model, CellKind, SeqConfig};

fn main() -> intentgrid::Result<()> {
    let ds = generate_order_task(1, 300);
    let (train, test) = stratified_split(&ds, 0.2, 1)?;
    let labels = ds.labels().to_vec();
    let golds = test.label_strings();

    let table = EmbeddingTable::random(build_vocabulary(&train, 1), 16, 7);
    let cfg = SeqConfig {
        hidden: 32,
        ..Default::default()
    };
    for kind in CellKind::ALL {
        let start = Instant::now();
        let (model, history) = train_sequence_model(kind, &train, &table, &cfg, 3)?;
        let report = evaluate(&model.predict_all(&test), &golds, &labels)?;
        println!(
            "{kind:<5} macro-F1 {:.4}  epochs {:>2}  {:.1}s",
            report.macro_f1,
            history.epochs(),
            start.elapsed().as_secs_f64()
        );
    }

    let mut resources = EncoderResources::new(1);
    for spec in [EncoderSpec::Count, EncoderSpec::Tfidf] {
        let enc = fit_encoder(&spec, &train, &mut resources)?;
        let (x, xt) = (enc.encode_all(&train), enc.encode_all(&test));
        for kind in [ModelKind::LinearSvm, ModelKind::LogReg] {
            let model = train_model(kind, &x, &train.label_strings(), &TrainConfig::default(), 3)?;
            let report = evaluate(&model.predict_all(&xt)?, &golds, &labels)?;
            println!("{spec:?} + {kind}: macro-F1 {:.4}", report.macro_f1);
        }
    }
    Ok(())
}
