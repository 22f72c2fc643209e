//! All eight fixed-vector classifiers on Gaussian blobs and on XOR.
//!
//!     cargo run --release --example classifiers_blobs

use std::time::Instant;

use intentgrid::classifiers::{train_model, Classifier, ModelKind, TrainConfig};
use intentgrid::numerics::{DenseVector, Features, RngStream};

fn blobs(seed: u64, n: usize) -> (Vec<Features>, Vec<String>) {
    let centers = [(0.0, 4.0), (-4.0, -3.0), (4.0, -3.0)];
    let mut rng = RngStream::new(seed);
    (0..n)
        .map(|i| {
            let (cx, cy) = centers[i % 3];
            let x = vec![cx + rng.normal(), cy + rng.normal()];
            (Features::Dense(DenseVector::from(x)), format!("blob{}", i % 3))
        })
        .unzip()
}

fn xor(seed: u64, n: usize) -> (Vec<Features>, Vec<String>) {
    let mut rng = RngStream::new(seed);
    (0..n)
        .map(|_| {
            let (a, b) = (rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
            let label = if (a > 0.0) == (b > 0.0) { "same" } else { "diff" };
            (Features::Dense(DenseVector::from(vec![a, b])), label.to_string())
        })
        .unzip()
}

fn accuracy(model: &impl Classifier, x: &[Features], y: &[String]) -> f64 {
    let pred = model.predict_all(x).expect("dimensions match");
    pred.iter().zip(y).filter(|(p, g)| p == g).count() as f64 / y.len() as f64
}

fn main() -> intentgrid::Result<()> {
    let cfg = TrainConfig::default();
    for (name, (x, y), (tx, ty)) in [
        ("blobs", blobs(1, 200), blobs(2, 200)),
        ("xor", xor(1, 400), xor(2, 400)),
    ] {
        println!("{name}");
        for kind in ModelKind::ALL {
            let start = Instant::now();
            let model = train_model(kind, &x, &y, &cfg, 7)?;
            println!(
                "  {kind:<14} accuracy {:.3}  {:.2}s",
                accuracy(&model, &tx, &ty),
                start.elapsed().as_secs_f64()
            );
        }
    }
    Ok(())
}
