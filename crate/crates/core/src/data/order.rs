//! A synthetic task that only order can solve: every utterance contains
//! exactly one `a` and one `b` among filler tokens, and the label says
//! which comes first. Bag-of-words views of both classes are identical in
//! distribution.

use crate::numerics::RngStream;

use super::dataset::{LabeledDataset, Record, Utterance};

pub const A_FIRST: &str = "a_first";
pub const B_FIRST: &str = "b_first";

const FILLERS: usize = 8;
const MIN_LEN: usize = 3;
const MAX_LEN: usize = 8;

/// `n_per_class` utterances of each label, shuffled under `seed`.
pub fn generate_order_task(seed: u64, n_per_class: usize) -> LabeledDataset {
    let mut rng = RngStream::new(seed);
    let mut records = Vec::with_capacity(2 * n_per_class);
    for label in [A_FIRST, B_FIRST] {
        for _ in 0..n_per_class {
            let len = MIN_LEN + rng.below(MAX_LEN - MIN_LEN + 1);
            let mut tokens: Vec<String> = (0..len).map(|_| format!("w{}", rng.below(FILLERS))).collect();
            let first = rng.below(len - 1);
            let second = first + 1 + rng.below(len - first - 1);
            let (x, y) = if label == A_FIRST { ("a", "b") } else { ("b", "a") };
            tokens[first] = x.to_string();
            tokens[second] = y.to_string();
            records.push(Record {
                utterance: Utterance::new(tokens.join(" ")),
                label: label.to_string(),
            });
        }
    }
    rng.shuffle(&mut records);
    LabeledDataset::new(records)
}
