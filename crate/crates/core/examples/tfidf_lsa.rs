//! Tf-idf vectors and their LSA projection: spectrum, reconstruction error
//! and how a linear classifier does on each.
//!
//!     cargo run --release --example tfidf_lsa

use intentgrid::classifiers::{train_model, Classifier, ModelKind, TrainConfig};
use intentgrid::data::{generate_codemix, stratified_split};
use intentgrid::encoders::{
    doc_term_matrix, lsa_fit, BagOfWords, Encoder, EncoderResources, EncoderSpec, fit_encoder,
};
use intentgrid::harness::evaluate;

fn main() -> intentgrid::Result<()> {
    let ds = generate_codemix(2, 100);
    let (train, test) = stratified_split(&ds, 0.2, 2)?;

    let bow = BagOfWords::fit_tfidf(&train);
    let docs: Vec<_> = train.utterances().map(|u| bow.encode_sparse(u)).collect();
    let x = doc_term_matrix(&docs)?;
    println!("doc-term matrix {} x {}", x.rows(), x.cols());
    for k in [5, 20, 50, 100] {
        let proj = lsa_fit(&x, k)?;
        let sv = proj.singular_values();
        let encoded: Vec<Vec<f64>> = docs
            .iter()
            .map(|d| intentgrid::encoders::lsa_encode(&proj, d).map(|v| v.into_vec()))
            .collect::<Result<_, _>>()?;
        let back = proj.reconstruct(&intentgrid::numerics::Matrix::from_rows(&encoded)?)?;
        let mut err = 0.0;
        for r in 0..x.rows() {
            for c in 0..x.cols() {
                err += (x.get(r, c) - back.get(r, c)).powi(2);
            }
        }
        println!(
            "rank {k:>3}: top sigma {:.3}, last {:.3}, relative error {:.4}",
            sv[0],
            sv[sv.len() - 1],
            err.sqrt() / x.frobenius_norm()
        );
    }

    let labels = ds.labels().to_vec();
    let mut res = EncoderResources::new(2);
    for spec in [EncoderSpec::Tfidf, EncoderSpec::TfidfLsa { rank: 10 }, EncoderSpec::TfidfLsa { rank: 100 }] {
        let enc = fit_encoder(&spec, &train, &mut res)?;
        let model = train_model(ModelKind::LogReg, &enc.encode_all(&train), &train.label_strings(), &TrainConfig::default(), 0)?;
        let report = evaluate(&model.predict_all(&enc.encode_all(&test))?, &test.label_strings(), &labels)?;
        println!("{spec:?} (dim {}): macro-F1 {:.4}", enc.dim(), report.macro_f1);
    }
    Ok(())
}
