//! Truncated SVD through the eigendecomposition of the smaller Gram matrix.
//!
//! Desk-scale inputs go through cyclic Jacobi directly. When either side of
//! the input exceeds [`RANDOMIZED_THRESHOLD`], a randomized range finder with
//! subspace iteration first reduces the problem to a `(k + oversample)`-wide
//! sketch, and the sketch is then decomposed the same way.

use crate::error::{Error, Result};

use super::matrix::Matrix;
use super::rng::RngStream;
use super::vector::{dot, norm};

pub const RANDOMIZED_THRESHOLD: usize = 2000;
const JACOBI_MAX_SWEEPS: usize = 100;
const OVERSAMPLE: usize = 10;
const POWER_ITERATIONS: usize = 4;
const SKETCH_SEED: u64 = 0x5eed_5bd0;

#[derive(Debug, Clone)]
pub struct Svd {
    /// m×k, orthonormal columns.
    pub u: Matrix,
    /// Singular values, nonincreasing.
    pub s: Vec<f64>,
    /// n×k, orthonormal columns.
    pub v: Matrix,
}

impl Svd {
    /// `U·diag(S)·Vᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let mut us = self.u.clone();
        for r in 0..us.rows() {
            for (c, s) in self.s.iter().enumerate() {
                let v = us.get(r, c) * s;
                us.set(r, c, v);
            }
        }
        us.matmul(&self.v.transpose()).expect("shapes agree")
    }
}

/// Rank-`k` truncated SVD of `m`.
pub fn truncated_svd(m: &Matrix, k: usize) -> Result<Svd> {
    let (rows, cols) = (m.rows(), m.cols());
    if k == 0 || k > rows.min(cols) {
        return Err(Error::arg(format!(
            "rank {k} out of range for a {rows}x{cols} matrix"
        )));
    }
    if rows > RANDOMIZED_THRESHOLD || cols > RANDOMIZED_THRESHOLD {
        randomized_svd(m, k)
    } else {
        gram_svd(m, k)
    }
}

fn gram_svd(m: &Matrix, k: usize) -> Result<Svd> {
    if m.cols() <= m.rows() {
        // MᵀM = V Λ Vᵀ; U = M V / σ
        let (_, vecs) = symmetric_eigen(&m.gram_cols())?;
        let (v, s, u) = map_through(m, &vecs.take_columns(k), false);
        Ok(Svd { u, s, v })
    } else {
        // MMᵀ = U Λ Uᵀ; V = Mᵀ U / σ
        let (_, vecs) = symmetric_eigen(&m.gram_rows())?;
        let (u, s, v) = map_through(m, &vecs.take_columns(k), true);
        Ok(Svd { u, s, v })
    }
}

/// Maps eigenvectors of the Gram matrix through `m` (or `mᵀ`). The singular
/// values are taken as the norms of the mapped vectors, which stays accurate
/// near zero where `sqrt(λ)` does not. Returns `(known, s, other)` sorted by
/// nonincreasing `s`; columns of `other` whose singular value vanishes are
/// completed with unit vectors orthogonal to the ones already built.
fn map_through(m: &Matrix, known: &Matrix, transpose: bool) -> (Matrix, Vec<f64>, Matrix) {
    let out_dim = if transpose { m.cols() } else { m.rows() };
    let k = known.cols();
    let mut mapped: Vec<(f64, Vec<f64>, Vec<f64>)> = (0..k)
        .map(|j| {
            let kj = known.column(j);
            let mut col = vec![0.0; out_dim];
            if transpose {
                for (r, &a) in kj.iter().enumerate() {
                    for (o, x) in col.iter_mut().zip(m.row(r)) {
                        *o += x * a;
                    }
                }
            } else {
                for (r, o) in col.iter_mut().enumerate() {
                    *o = dot(m.row(r), &kj);
                }
            }
            (norm(&col), kj, col)
        })
        .collect();
    mapped.sort_by(|a, b| b.0.total_cmp(&a.0));

    let s_max = mapped.first().map_or(0.0, |x| x.0);
    let tiny = f64::EPSILON * s_max * (m.rows().max(m.cols()) as f64);
    let mut s = Vec::with_capacity(k);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut known_sorted = Matrix::zeros(known.rows(), k);
    for (c, (sigma, kj, mut col)) in mapped.into_iter().enumerate() {
        for (r, v) in kj.iter().enumerate() {
            known_sorted.set(r, c, *v);
        }
        let mut filled = sigma > tiny && orthonormalize_against(&mut col, &cols);
        let mut e = 0;
        while !filled && e < out_dim {
            col = vec![0.0; out_dim];
            col[e] = 1.0;
            filled = orthonormalize_against(&mut col, &cols);
            e += 1;
        }
        s.push(if sigma > tiny { sigma } else { 0.0 });
        cols.push(col);
    }
    let mut other = Matrix::zeros(out_dim, k);
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            other.set(r, c, *v);
        }
    }
    (known_sorted, s, other)
}

/// Two passes of modified Gram-Schmidt, then normalization. Returns false
/// when the vector is (numerically) inside the span of `basis`.
fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) -> bool {
    let original = norm(v);
    if original == 0.0 {
        return false;
    }
    for _ in 0..2 {
        for b in basis {
            let p = dot(v, b);
            for (x, y) in v.iter_mut().zip(b) {
                *x -= p * y;
            }
        }
    }
    let n = norm(v);
    if n <= 1e-10 * original {
        return false;
    }
    for x in v.iter_mut() {
        *x /= n;
    }
    true
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Eigenvalues are returned in nonincreasing order with eigenvectors as the
/// matching columns.
pub fn symmetric_eigen(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = a.rows();
    Error::check_dim(n, a.cols())?;
    let mut a = a.clone();
    let mut v = Matrix::identity(n);
    let total: f64 = a.frobenius_norm();
    let target = (f64::EPSILON * n as f64 * total).powi(2);
    let negligible = f64::EPSILON * 1e-3 * total;
    let mut converged = n <= 1 || total == 0.0;
    let mut sweeps = 0;
    while !converged {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).powi(2))
            .sum();
        if off <= target {
            converged = true;
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= negligible {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }
    if !converged {
        return Err(Error::Convergence {
            what: "Jacobi eigendecomposition".into(),
            iterations: sweeps,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(j, j).total_cmp(&a.get(i, i)).then(i.cmp(&j)));
    let vals = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        for r in 0..n {
            vecs.set(r, c, v.get(r, i));
        }
    }
    Ok((vals, vecs))
}

fn orthonormal_columns(y: &Matrix) -> Matrix {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(y.cols());
    for c in 0..y.cols() {
        let mut col = y.column(c);
        if orthonormalize_against(&mut col, &cols) {
            cols.push(col);
        }
    }
    let mut q = Matrix::zeros(y.rows(), cols.len());
    for (c, col) in cols.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            q.set(r, c, *v);
        }
    }
    q
}

fn randomized_svd(m: &Matrix, k: usize) -> Result<Svd> {
    let width = (k + OVERSAMPLE).min(m.rows().min(m.cols()));
    let mut rng = RngStream::new(SKETCH_SEED);
    let omega = Matrix::from_vec(
        m.cols(),
        width,
        (0..m.cols() * width).map(|_| rng.normal()).collect(),
    )?;
    let mt = m.transpose();
    let mut q = orthonormal_columns(&m.matmul(&omega)?);
    for _ in 0..POWER_ITERATIONS {
        let z = orthonormal_columns(&mt.matmul(&q)?);
        q = orthonormal_columns(&m.matmul(&z)?);
    }
    if q.cols() < k {
        return Err(Error::Convergence {
            what: format!("range finder captured only {} of {k} directions", q.cols()),
            iterations: POWER_ITERATIONS,
        });
    }
    // B = QᵀM is small; decompose it exactly and lift U back through Q.
    let b = q.transpose().matmul(m)?;
    let small = gram_svd(&b, k)?;
    let u = q.matmul(&small.u)?;
    Ok(Svd {
        u,
        s: small.s,
        v: small.v,
    })
}
