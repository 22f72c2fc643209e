use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numerics::rng::{label_hash, RngStream};

use super::dataset::LabeledDataset;

/// Per-class test counts: round-half-up per class, then single-record
/// corrections (largest classes first, only classes whose rounding moved in
/// the offending direction) until the total equals `round(n · fraction)`.
pub fn stratified_test_counts(class_sizes: &[usize], fraction: f64) -> Vec<usize> {
    let exact: Vec<f64> = class_sizes.iter().map(|&n| n as f64 * fraction).collect();
    let mut counts: Vec<usize> = exact
        .iter()
        .zip(class_sizes)
        .map(|(&e, &n)| ((e + 0.5).floor() as usize).min(n))
        .collect();
    let total: usize = class_sizes.iter().sum();
    let target = ((total as f64 * fraction) + 0.5).floor() as usize;

    let mut order: Vec<usize> = (0..class_sizes.len()).collect();
    order.sort_by(|&a, &b| class_sizes[b].cmp(&class_sizes[a]).then(a.cmp(&b)));
    let mut adjusted = vec![false; class_sizes.len()];
    loop {
        let sum: usize = counts.iter().sum();
        if sum == target {
            break;
        }
        let too_many = sum > target;
        let pick = order
            .iter()
            .copied()
            .find(|&c| {
                !adjusted[c]
                    && if too_many {
                        counts[c] > 0 && counts[c] as f64 > exact[c]
                    } else {
                        counts[c] < class_sizes[c] && (counts[c] as f64) < exact[c]
                    }
            })
            .or_else(|| {
                order.iter().copied().find(|&c| {
                    !adjusted[c]
                        && if too_many {
                            counts[c] > 0
                        } else {
                            counts[c] < class_sizes[c]
                        }
                })
            });
        match pick {
            Some(c) => {
                adjusted[c] = true;
                if too_many {
                    counts[c] -= 1;
                } else {
                    counts[c] += 1;
                }
            }
            None => break,
        }
    }
    counts
}

/// Stratified split of `labels` into `(train, test)` index lists, each in
/// ascending index order. Within-class selection is uniform under `seed`.
pub fn stratified_indices(
    labels: &[String],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::arg(format!(
            "test fraction {test_fraction} outside [0, 1)"
        )));
    }
    let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.as_str()).or_default().push(i);
    }
    let sizes: Vec<usize> = by_class.values().map(Vec::len).collect();
    let counts = stratified_test_counts(&sizes, test_fraction);
    let root = RngStream::new(seed);
    let mut is_test = vec![false; labels.len()];
    for ((label, members), &n_test) in by_class.iter().zip(&counts) {
        let mut members = members.clone();
        root.derive(label_hash(label)).shuffle(&mut members);
        for &i in &members[..n_test] {
            is_test[i] = true;
        }
    }
    let (test, train): (Vec<usize>, Vec<usize>) = (0..labels.len()).partition(|&i| is_test[i]);
    Ok((train, test))
}

/// Splits `ds` into `(train, test)` with per-class test counts of
/// `round(class_count × test_fraction)`.
pub fn stratified_split(
    ds: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    let (train, test) = stratified_indices(&ds.label_strings(), test_fraction, seed)?;
    Ok((ds.subset(&train), ds.subset(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn balanced(classes: usize, per: usize) -> LabeledDataset {
        LabeledDataset::from_pairs(
            (0..classes).flat_map(|c| (0..per).map(move |i| (format!("C{c}"), format!("utt {c} {i}")))),
        )
    }

    #[test]
    fn full_size_structure() {
        let ds = balanced(7, 1100);
        let (train, test) = stratified_split(&ds, 700.0 / 7700.0, 1).unwrap();
        assert_eq!(train.len(), 7000);
        assert_eq!(test.len(), 700);
        for (_, n) in test.count_by_label() {
            assert_eq!(n, 100);
        }
    }

    #[test]
    fn zero_fraction() {
        let ds = balanced(2, 5);
        let (train, test) = stratified_split(&ds, 0.0, 3).unwrap();
        assert_eq!(train, ds);
        assert!(test.is_empty());
    }

    #[test]
    fn one_per_class() {
        let ds = balanced(2, 5);
        let (_, test) = stratified_split(&ds, 0.2, 3).unwrap();
        assert_eq!(test.count_by_label(), vec![("C0".into(), 1), ("C1".into(), 1)]);
    }

    #[test]
    fn fraction_out_of_range() {
        let ds = balanced(2, 5);
        assert!(matches!(stratified_split(&ds, 1.0, 0), Err(Error::Argument(_))));
        assert!(matches!(stratified_split(&ds, -0.1, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn half_up_overshoot_is_corrected() {
        // 3 classes of 5 at 0.1 → each rounds 0.5 up to 1; target round(1.5) = 2
        let counts = stratified_test_counts(&[5, 5, 5], 0.1);
        assert_eq!(counts.iter().sum::<usize>(), 2);
        assert!(counts.iter().all(|&c| c <= 1));
    }

    proptest! {
        #[test]
        fn proportions_within_one(sizes in proptest::collection::vec(1usize..40, 1..8),
                                  frac in 0.0f64..0.9, seed in any::<u64>()) {
            let labels: Vec<String> = sizes.iter().enumerate()
                .flat_map(|(c, &n)| std::iter::repeat_n(format!("L{c}"), n)).collect();
            let (train, test) = stratified_indices(&labels, frac, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), labels.len());
            for (c, &n) in sizes.iter().enumerate() {
                let name = format!("L{c}");
                let got = test.iter().filter(|&&i| labels[i] == name).count() as f64;
                prop_assert!((got - n as f64 * frac).abs() <= 1.0 + 1e-9);
            }
        }
    }
}
