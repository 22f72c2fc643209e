//! One-vs-rest RBF-kernel SVMs trained by sequential minimal optimization.
//!
//! Each binary dual `min ½αᵀQα − Σα, 0 ≤ α ≤ C, yᵀα = 0` is solved two
//! multipliers at a time. The first index is the maximal KKT violator, the
//! second maximizes the guaranteed objective decrease. Training stops once
//! the violation gap falls below the tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{squared_distance, Features, Matrix};

use super::common::{densify, prepare, Classifier};
use super::config::TrainConfig;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSvm {
    labels: Vec<String>,
    gamma: f64,
    /// Union of the support vectors of all binary problems.
    support: Matrix,
    /// `α_i y_i` per class over the rows of `support`.
    coef: Vec<Vec<f64>>,
    rho: Vec<f64>,
}

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

struct BinarySolution {
    alpha: Vec<f64>,
    rho: f64,
}

fn solve_binary(k: &Matrix, y: &[f64], c: f64, tol: f64, max_iter: usize) -> Result<BinarySolution> {
    let n = y.len();
    let mut alpha = vec![0.0; n];
    // Gradient of the dual objective: G = Qα − 1.
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yt: f64| (yt > 0.0 && a < c) || (yt < 0.0 && a > 0.0);
    let in_low = |a: f64, yt: f64| (yt > 0.0 && a > 0.0) || (yt < 0.0 && a < c);

    let mut converged = false;
    for _ in 0..max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) && -y[t] * grad[t] > gmax {
                gmax = -y[t] * grad[t];
                i = t;
            }
        }
        let mut gmin = f64::INFINITY;
        let mut j = usize::MAX;
        let mut best_gain = f64::INFINITY;
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = -y[t] * grad[t];
            gmin = gmin.min(v);
            if i != usize::MAX && v < gmax {
                let b = gmax - v;
                let a = (k.get(i, i) + k.get(t, t) - 2.0 * k.get(i, t)).max(TAU);
                let gain = -(b * b) / a;
                if gain < best_gain {
                    best_gain = gain;
                    j = t;
                }
            }
        }
        if i == usize::MAX || j == usize::MAX || gmax - gmin < tol {
            converged = true;
            break;
        }

        let (ai, aj) = (alpha[i], alpha[j]);
        let kij = k.get(i, j);
        let quad = (k.get(i, i) + k.get(j, j) - 2.0 * kij).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = ai - aj;
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = ai + aj;
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - ai, alpha[j] - aj);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k.get(t, i) * di + y[j] * k.get(t, j) * dj);
        }
    }
    if !converged {
        return Err(Error::Convergence {
            what: "SMO".into(),
            iterations: max_iter,
        });
    }

    // ρ from free multipliers, else the midpoint of the feasible interval.
    let mut free_sum = 0.0;
    let mut free_n = 0usize;
    let mut ub = f64::INFINITY;
    let mut lb = f64::NEG_INFINITY;
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] > 0.0 && alpha[t] < c {
            free_sum += yg;
            free_n += 1;
        } else if (alpha[t] >= c) == (y[t] > 0.0) {
            lb = lb.max(yg);
        } else {
            ub = ub.min(yg);
        }
    }
    let rho = if free_n > 0 {
        free_sum / free_n as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(BinarySolution { alpha, rho })
}

pub fn train_kernel_svm(x: &[Features], y: &[String], cfg: &TrainConfig) -> Result<KernelSvm> {
    cfg.validate()?;
    let p = prepare(x, y, 2)?;
    let gamma = cfg.gamma.unwrap_or(1.0 / p.dim.max(1) as f64);
    let data = densify(x, p.dim);
    let n = x.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        k.set(i, i, 1.0);
        for j in 0..i {
            let v = rbf(data.row(i), data.row(j), gamma);
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }

    let mut alphas = Vec::with_capacity(p.labels.len());
    let mut rho = Vec::with_capacity(p.labels.len());
    for class in 0..p.labels.len() {
        let signs: Vec<f64> = p
            .targets
            .iter()
            .map(|&t| if t == class { 1.0 } else { -1.0 })
            .collect();
        let sol = solve_binary(&k, &signs, cfg.c, cfg.smo_tolerance, cfg.smo_max_iter)?;
        let coef: Vec<f64> = sol.alpha.iter().zip(&signs).map(|(a, s)| a * s).collect();
        alphas.push(coef);
        rho.push(sol.rho);
    }

    let support_idx: Vec<usize> = (0..n).filter(|&i| alphas.iter().any(|a| a[i] != 0.0)).collect();
    let mut support = Matrix::zeros(support_idx.len(), p.dim);
    for (r, &i) in support_idx.iter().enumerate() {
        support.row_mut(r).copy_from_slice(data.row(i));
    }
    let coef = alphas
        .iter()
        .map(|a| support_idx.iter().map(|&i| a[i]).collect())
        .collect();
    Ok(KernelSvm {
        labels: p.labels,
        gamma,
        support,
        coef,
        rho,
    })
}

impl KernelSvm {
    pub fn n_support(&self) -> usize {
        self.support.rows()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Classifier for KernelSvm {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn input_dim(&self) -> usize {
        self.support.cols()
    }

    fn scores_unchecked(&self, x: &Features) -> Vec<f64> {
        let q = x.to_dense();
        let kv: Vec<f64> = (0..self.support.rows())
            .map(|r| rbf(self.support.row(r), &q, self.gamma))
            .collect();
        self.coef
            .iter()
            .zip(&self.rho)
            .map(|(c, rho)| c.iter().zip(&kv).map(|(a, k)| a * k).sum::<f64>() - rho)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{DenseVector, RngStream};

    fn dense(v: &[f64]) -> Features {
        Features::Dense(DenseVector::from(v.to_vec()))
    }

    fn xor(seed: u64, n: usize) -> (Vec<Features>, Vec<String>) {
        let mut rng = RngStream::new(seed);
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..n {
            let (a, b) = ((i % 2) as f64, ((i / 2) % 2) as f64);
            let sa = 2.0 * a - 1.0;
            let sb = 2.0 * b - 1.0;
            x.push(dense(&[sa + 0.2 * rng.normal(), sb + 0.2 * rng.normal()]));
            y.push(if a == b { "even" } else { "odd" }.to_string());
        }
        (x, y)
    }

    #[test]
    fn learns_xor() {
        let (x, y) = xor(1, 120);
        let m = train_kernel_svm(&x, &y, &TrainConfig::default()).unwrap();
        let (tx, ty) = xor(2, 80);
        let pred = m.predict_all(&tx).unwrap();
        let correct = pred.iter().zip(&ty).filter(|(p, g)| p == g).count();
        assert!(correct >= 76, "{correct}");
    }

    #[test]
    fn memorizes_single_points() {
        let x = vec![dense(&[0.0, 0.0]), dense(&[1.0, 1.0]), dense(&[0.0, 3.0])];
        let y: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let m = train_kernel_svm(&x, &y, &TrainConfig::default()).unwrap();
        assert_eq!(m.predict_all(&x).unwrap(), y);
    }

    #[test]
    fn tiny_iteration_budget_reports_non_convergence() {
        let (x, y) = xor(1, 60);
        let cfg = TrainConfig { smo_max_iter: 2, ..Default::default() };
        assert!(matches!(train_kernel_svm(&x, &y, &cfg), Err(Error::Convergence { .. })));
    }

    #[test]
    fn dual_solution_satisfies_kkt() {
        let (x, y) = xor(3, 40);
        let data = densify(&x, 2);
        let n = x.len();
        let mut k = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                k.set(i, j, rbf(data.row(i), data.row(j), 0.5));
            }
        }
        let s: Vec<f64> = y.iter().map(|l| if l == "odd" { 1.0 } else { -1.0 }).collect();
        let sol = solve_binary(&k, &s, 1.0, 1e-6, 100_000).unwrap();
        let balance: f64 = sol.alpha.iter().zip(&s).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-9);
        for i in 0..n {
            let f: f64 = (0..n).map(|j| sol.alpha[j] * s[j] * k.get(i, j)).sum::<f64>() - sol.rho;
            let m = s[i] * f;
            let a = sol.alpha[i];
            if a == 0.0 {
                assert!(m >= 1.0 - 1e-3, "{i} {m}");
            } else if a >= 1.0 {
                assert!(m <= 1.0 + 1e-3, "{i} {m}");
            } else {
                assert!((m - 1.0).abs() < 1e-3, "{i} {m}");
            }
        }
    }
}
