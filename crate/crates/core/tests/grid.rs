use std::collections::BTreeSet;

use intentgrid::classifiers::{train_model, Classifier, ModelKind, TrainConfig};
use intentgrid::data::{generate_codemix, stratified_split, LabeledDataset};
use intentgrid::encoders::{fit_encoder, Encoder, EncoderResources, EncoderSpec, SgnsConfig};
use intentgrid::harness::{
    evaluate, parse_grid_spec_str, run_grid, DatasetSource, GridSpec, NamedClassifier, NamedEncoder,
};
use intentgrid::numerics::{cell_seed, label_hash, mix_seed};
use proptest::prelude::*;

fn one_cell_spec(seed: u64, encoder: EncoderSpec, kind: ModelKind) -> GridSpec {
    let mut spec = GridSpec::new(seed);
    spec.dataset = DatasetSource::Codemix { seed: 4, per_intent: 30 };
    spec.encoders.push(NamedEncoder { name: "enc".into(), spec: encoder });
    spec.classifiers.push(NamedClassifier {
        name: "clf".into(),
        kind,
        config: TrainConfig { hidden: (16, 16), ..Default::default() },
    });
    spec
}

fn train_vocab(train: &LabeledDataset) -> BTreeSet<String> {
    train.utterances().flat_map(|u| u.tokens.iter().cloned()).collect()
}

#[test]
fn single_cell_matches_standalone_training() {
    let cases = [
        (EncoderSpec::Tfidf, ModelKind::LogReg),
        (EncoderSpec::CountLsa { rank: 20 }, ModelKind::RandomForest),
        (EncoderSpec::SgnsAvg(SgnsConfig { dim: 8, epochs: 2, ..Default::default() }), ModelKind::Ffnn),
    ];
    for (encoder, kind) in cases {
        let spec = one_cell_spec(11, encoder.clone(), kind);
        let report = run_grid(&spec, 1).unwrap();
        let from_grid = report.classic.unwrap().cells[0][0].outcome.clone().unwrap();

        let ds = generate_codemix(4, 30);
        let (train, test) = stratified_split(&ds, spec.test_fraction, spec.split_seed).unwrap();
        let mut resources = EncoderResources::new(mix_seed(11, label_hash("encoders")));
        let enc = fit_encoder(&encoder, &train, &mut resources).unwrap();
        let model = train_model(
            kind,
            &enc.encode_all(&train),
            &train.label_strings(),
            &spec.classifiers[0].config,
            cell_seed(11, 0, 0),
        )
        .unwrap();
        let pred = model.predict_all(&enc.encode_all(&test)).unwrap();
        let r = evaluate(&pred, &test.label_strings(), ds.labels()).unwrap();
        assert_eq!(from_grid.macro_f1, (r.macro_f1 * 10000.0).round() / 100.0, "{kind}");
    }
}

#[test]
fn split_digests_are_recorded_and_disjoint() {
    let spec = one_cell_spec(3, EncoderSpec::Count, ModelKind::Cosine);
    let report = run_grid(&spec, 1).unwrap();
    let ds = generate_codemix(4, 30);
    let (train, test) = stratified_split(&ds, spec.test_fraction, spec.split_seed).unwrap();
    assert_eq!(report.train_digest, train.digest());
    assert_eq!(report.test_digest, test.digest());
    assert_ne!(report.train_digest, report.test_digest);
    assert_eq!(report.n_train + report.n_test, ds.len());
}

#[test]
fn fitted_vocabularies_come_from_training_split_only() {
    let ds = generate_codemix(8, 25);
    let (train, test) = stratified_split(&ds, 0.3, 2).unwrap();
    let seen = train_vocab(&train);
    let test_only: BTreeSet<String> = train_vocab(&test).difference(&seen).cloned().collect();
    assert!(!test_only.is_empty(), "need test-only tokens for the check to mean anything");

    let mut resources = EncoderResources::new(1);
    let table = resources
        .sgns_table(&train, &SgnsConfig { dim: 4, epochs: 1, ..Default::default() })
        .unwrap();
    let bow = intentgrid::encoders::BagOfWords::fit_tfidf(&train);
    for vocab in [table.vocab(), bow.vocab()] {
        for i in 0..vocab.len() {
            assert!(seen.contains(vocab.token(i)), "{}", vocab.token(i));
        }
        for t in &test_only {
            assert!(vocab.index_of(t).is_none(), "{t}");
        }
    }
}

#[test]
fn spec_text_and_struct_agree() {
    let text = "[grid]\nseed = 11\n[dataset]\nsource = codemix\nseed = 4\nper_intent = 30\n\
                [encoders]\nenc = tfidf\n[classifiers]\nclf = logreg\n";
    let parsed = parse_grid_spec_str(text, std::path::Path::new(".")).unwrap();
    let built = one_cell_spec(11, EncoderSpec::Tfidf, ModelKind::LogReg);
    assert_eq!(parsed.split_seed, built.split_seed);
    assert_eq!(parsed.test_fraction, built.test_fraction);
    assert_eq!(parsed.dataset, built.dataset);
}

fn labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("l{i}")).collect()
}

proptest! {
    #[test]
    fn macro_f1_ignores_record_order(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60),
        rot in 0usize..60,
    ) {
        let names = labels(4);
        let pred: Vec<String> = pairs.iter().map(|p| names[p.0].clone()).collect();
        let gold: Vec<String> = pairs.iter().map(|p| names[p.1].clone()).collect();
        let a = evaluate(&pred, &gold, &names).unwrap().macro_f1;
        let k = rot % pairs.len();
        let (mut p2, mut g2) = (pred.clone(), gold.clone());
        p2.rotate_left(k);
        g2.rotate_left(k);
        p2.reverse();
        g2.reverse();
        prop_assert_eq!(a, evaluate(&p2, &g2, &names).unwrap().macro_f1);
    }

    #[test]
    fn macro_f1_ignores_label_names(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60)) {
        let names = labels(4);
        let renamed: Vec<String> = (0..4).map(|i| format!("other-{}", 3 - i)).collect();
        let eval = |n: &[String]| {
            let pred: Vec<String> = pairs.iter().map(|p| n[p.0].clone()).collect();
            let gold: Vec<String> = pairs.iter().map(|p| n[p.1].clone()).collect();
            evaluate(&pred, &gold, n).unwrap()
        };
        let (a, b) = (eval(&names), eval(&renamed));
        prop_assert!((a.macro_f1 - b.macro_f1).abs() < 1e-12);
        prop_assert_eq!(a.accuracy, b.accuracy);
    }
}
