//! Gini decision trees and bootstrap random forests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{Features, RngStream};

use super::common::{majority, prepare, Classifier};
use super::config::TrainConfig;

/// `1 − Σ p_c²` over class counts.
pub fn gini(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        counts: Vec<usize>,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn leaf_counts(&self, x: &[f64]) -> &[usize] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { counts } => return counts,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Column-major training view with each row's nonzero features, so nodes
/// only consider features that vary.
struct Columns {
    cols: Vec<Vec<f64>>,
    nonzero: Vec<Vec<usize>>,
    targets: Vec<usize>,
    n_classes: usize,
}

impl Columns {
    fn new(x: &[Features], targets: Vec<usize>, n_classes: usize, dim: usize) -> Self {
        let mut cols = vec![vec![0.0; x.len()]; dim];
        let mut nonzero = Vec::with_capacity(x.len());
        for (r, xi) in x.iter().enumerate() {
            let mut nz = Vec::new();
            match xi {
                Features::Dense(d) => {
                    for (c, &v) in d.iter().enumerate() {
                        if v != 0.0 {
                            cols[c][r] = v;
                            nz.push(c);
                        }
                    }
                }
                Features::Sparse(s) => {
                    for (c, v) in s.iter() {
                        cols[c][r] = v;
                        nz.push(c);
                    }
                }
            }
            nonzero.push(nz);
        }
        Columns {
            cols,
            nonzero,
            targets,
            n_classes,
        }
    }
}

struct Limits {
    max_depth: usize,
    min_samples_split: usize,
    max_features: Option<usize>,
}

#[derive(Clone, Copy)]
struct Candidate {
    impurity: f64,
    feature: usize,
    threshold: f64,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        (self.impurity, self.feature, self.threshold)
            .partial_cmp(&(other.impurity, other.feature, other.threshold))
            .is_some_and(|o| o.is_lt())
    }
}

struct Builder<'a> {
    data: &'a Columns,
    limits: &'a Limits,
    rng: RngStream,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.data.n_classes];
        for &r in rows {
            c[self.data.targets[r]] += 1;
        }
        c
    }

    fn best_split_on(&self, rows: &[usize], feature: usize, total: &[usize]) -> Option<Candidate> {
        let col = &self.data.cols[feature];
        let mut pairs: Vec<(f64, usize)> = rows.iter().map(|&r| (col[r], self.data.targets[r])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pairs[0].0 == pairs[pairs.len() - 1].0 {
            return None;
        }
        let n = pairs.len();
        let mut left = vec![0usize; self.data.n_classes];
        let mut best: Option<Candidate> = None;
        for i in 0..n - 1 {
            left[pairs[i].1] += 1;
            let (a, b) = (pairs[i].0, pairs[i + 1].0);
            if a == b {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let nl = (i + 1) as f64;
            let nr = (n - i - 1) as f64;
            let impurity = (nl * gini(&left) + nr * gini(&right)) / n as f64;
            let mut threshold = a + (b - a) / 2.0;
            if threshold >= b {
                threshold = a;
            }
            let cand = Candidate {
                impurity,
                feature,
                threshold,
            };
            if best.as_ref().is_none_or(|bst| cand.better_than(bst)) {
                best = Some(cand);
            }
        }
        best
    }

    fn varying_features(&self, rows: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.data.cols.len()];
        let mut out = Vec::new();
        for &r in rows {
            for &f in &self.data.nonzero[r] {
                if !seen[f] {
                    seen[f] = true;
                    out.push(f);
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn choose_split(&mut self, rows: &[usize], total: &[usize]) -> Option<Candidate> {
        let mut features = self.varying_features(rows);
        let wanted = self.limits.max_features.unwrap_or(features.len());
        let mut best: Option<Candidate> = None;
        let mut evaluated = 0;
        let mut i = 0;
        while i < features.len() && evaluated < wanted {
            if self.limits.max_features.is_some() {
                let j = i + self.rng.below(features.len() - i);
                features.swap(i, j);
            }
            if let Some(c) = self.best_split_on(rows, features[i], total) {
                evaluated += 1;
                if best.as_ref().is_none_or(|b| c.better_than(b)) {
                    best = Some(c);
                }
            }
            i += 1;
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { counts: counts.clone() });
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.limits.max_depth || rows.len() < self.limits.min_samples_split {
            return id;
        }
        let Some(split) = self.choose_split(&rows, &counts) else {
            return id;
        };
        let col = &self.data.cols[split.feature];
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&row| col[row] <= split.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left,
            right,
        };
        id
    }
}

fn build_tree(data: &Columns, rows: Vec<usize>, limits: &Limits, rng: RngStream) -> Tree {
    let mut b = Builder {
        data,
        limits,
        rng,
        nodes: Vec::new(),
    };
    b.grow(rows, 0);
    Tree { nodes: b.nodes }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    labels: Vec<String>,
    dim: usize,
    tree: Tree,
}

pub fn train_decision_tree(x: &[Features], y: &[String], cfg: &TrainConfig) -> Result<DecisionTree> {
    cfg.validate()?;
    let p = prepare(x, y, 2)?;
    let data = Columns::new(x, p.targets, p.labels.len(), p.dim);
    let limits = Limits {
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
        max_features: None,
    };
    let tree = build_tree(&data, (0..x.len()).collect(), &limits, RngStream::new(0));
    Ok(DecisionTree {
        labels: p.labels,
        dim: p.dim,
        tree,
    })
}

impl DecisionTree {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }
}

impl Classifier for DecisionTree {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    /// Class proportions at the reached leaf.
    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        let counts = self.tree.leaf_counts(&x.to_dense());
        let n: usize = counts.iter().sum();
        counts.iter().map(|&c| c as f64 / n as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    labels: Vec<String>,
    dim: usize,
    trees: Vec<Tree>,
}

pub fn train_random_forest(x: &[Features], y: &[String], cfg: &TrainConfig, seed: u64) -> Result<RandomForest> {
    cfg.validate()?;
    let p = prepare(x, y, 2)?;
    let data = Columns::new(x, p.targets, p.labels.len(), p.dim);
    let limits = Limits {
        max_depth: cfg.max_depth,
        min_samples_split: cfg.min_samples_split,
        max_features: Some(cfg.max_features.unwrap_or((p.dim as f64).sqrt().ceil() as usize).max(1)),
    };
    let root = RngStream::new(seed);
    let n = x.len();
    let trees = (0..cfg.trees)
        .into_par_iter()
        .map(|t| {
            let rng = root.derive(t as u64);
            let rows = if cfg.bootstrap {
                let mut draw = rng.derive_str("bootstrap");
                (0..n).map(|_| draw.below(n)).collect()
            } else {
                (0..n).collect()
            };
            build_tree(&data, rows, &limits, rng.derive_str("features"))
        })
        .collect();
    Ok(RandomForest {
        labels: p.labels,
        dim: p.dim,
        trees,
    })
}

impl RandomForest {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }
}

impl Classifier for RandomForest {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.dim
    }

    /// Fraction of trees voting for each label.
    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        let q = x.to_dense();
        let mut votes = vec![0.0; self.labels.len()];
        for t in &self.trees {
            votes[majority(t.leaf_counts(&q))] += 1.0;
        }
        let total = self.trees.len() as f64;
        votes.iter().map(|v| v / total).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::DenseVector;

    fn dense(v: &[f64]) -> Features {
        Features::Dense(DenseVector::from(v.to_vec()))
    }

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 0]), 0.0);
        assert_eq!(gini(&[3, 3]), 0.5);
        assert!((gini(&[1, 1, 1]) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_points_split_at_midpoint() {
        let m = train_decision_tree(&[dense(&[0.0]), dense(&[1.0])], &labels(&["A", "B"]), &TrainConfig::default()).unwrap();
        match &m.tree().nodes()[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!(*feature, 0);
                assert_eq!(*threshold, 0.5);
            }
            other => panic!("expected split, got {other:?}"),
        }
        assert_eq!(m.tree().nodes().len(), 3);
    }

    #[test]
    fn pure_node_stays_a_leaf() {
        let x = vec![dense(&[0.0]), dense(&[1.0]), dense(&[2.0])];
        let y = labels(&["A", "A", "A"]);
        let data = Columns::new(&x, vec![0, 0, 0], 1, 1);
        let limits = Limits {
            max_depth: 10,
            min_samples_split: 2,
            max_features: None,
        };
        let t = build_tree(&data, vec![0, 1, 2], &limits, RngStream::new(0));
        assert_eq!(t.nodes().len(), 1);
        assert!(train_decision_tree(&x, &y, &TrainConfig::default()).is_err());
    }

    #[test]
    fn xor_fits_even_without_first_split_gain() {
        let x = vec![dense(&[0.0, 0.0]), dense(&[0.0, 1.0]), dense(&[1.0, 0.0]), dense(&[1.0, 1.0])];
        let y = labels(&["E", "O", "O", "E"]);
        let m = train_decision_tree(&x, &y, &TrainConfig::default()).unwrap();
        assert_eq!(m.predict_all(&x).unwrap(), y);
    }

    #[test]
    fn depth_limit_is_respected() {
        let x: Vec<Features> = (0..32).map(|i| dense(&[i as f64])).collect();
        let y: Vec<String> = (0..32).map(|i| format!("{}", i % 2)).collect();
        let cfg = TrainConfig { max_depth: 3, ..Default::default() };
        assert!(train_decision_tree(&x, &y, &cfg).unwrap().tree().depth() <= 3);
    }

    #[test]
    fn single_unbootstrapped_tree_matches_decision_tree() {
        let mut rng = RngStream::new(3);
        let x: Vec<Features> = (0..60).map(|_| dense(&[rng.normal(), rng.normal(), rng.normal()])).collect();
        let y: Vec<String> = (0..60).map(|i| format!("c{}", i % 3)).collect();
        let cfg = TrainConfig {
            trees: 1,
            bootstrap: false,
            max_features: Some(3),
            ..Default::default()
        };
        let f = train_random_forest(&x, &y, &cfg, 9).unwrap();
        let t = train_decision_tree(&x, &y, &cfg).unwrap();
        assert_eq!(&f.trees()[0], t.tree());
    }

    #[test]
    fn forest_is_seed_deterministic() {
        let mut rng = RngStream::new(4);
        let x: Vec<Features> = (0..50).map(|_| dense(&[rng.normal(), rng.normal()])).collect();
        let y: Vec<String> = (0..50).map(|i| format!("c{}", i % 2)).collect();
        let cfg = TrainConfig { trees: 8, ..Default::default() };
        let a = train_random_forest(&x, &y, &cfg, 5).unwrap();
        let b = train_random_forest(&x, &y, &cfg, 5).unwrap();
        assert_eq!(a, b);
    }
}
