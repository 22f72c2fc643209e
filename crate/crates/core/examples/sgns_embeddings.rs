//! Trains skip-gram embeddings on the code-mix corpus, prints the loss curve
//! and nearest neighbors of a few tokens.
//!
//!     cargo run --release --example sgns_embeddings

use intentgrid::data::generate_codemix;
use intentgrid::encoders::{sgns_train_with_loss, SgnsConfig};
use intentgrid::numerics::{dot, norm};

fn main() -> intentgrid::Result<()> {
    let ds = generate_codemix(1, 200);
    let cfg = SgnsConfig {
        epochs: 10,
        ..SgnsConfig::with_dim(50)
    };
    let model = sgns_train_with_loss(&ds, &cfg, 42)?;
    for (e, loss) in model.epoch_loss.iter().enumerate() {
        println!("epoch {e:>2}  loss {loss:.4}");
    }

    let table = &model.table;
    let vocab = table.vocab();
    for query in ["weather", "mausam", "book", "play", "gaana"] {
        let Some(q) = table.lookup(query) else {
            println!("{query}: not in vocabulary");
            continue;
        };
        let mut sims: Vec<(f64, &str)> = vocab
            .tokens()
            .iter()
            .filter(|t| t.as_str() != query)
            .map(|t| {
                let v = table.lookup(t).expect("token from vocabulary");
                (dot(q, v) / (norm(q) * norm(v)).max(1e-12), t.as_str())
            })
            .collect();
        sims.sort_by(|a, b| b.0.total_cmp(&a.0));
        let top: Vec<String> = sims.iter().take(5).map(|(s, t)| format!("{t} {s:.2}")).collect();
        println!("{query}: {}", top.join(", "));
    }
    Ok(())
}
