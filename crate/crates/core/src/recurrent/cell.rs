//! Single recurrent steps and their backward passes.
//!
//! Gate blocks are stacked row-wise: `W` is `(G·H) × D`, `U` is `(G·H) × H`,
//! `b` has `G·H` entries. Block order is `[z, r, n]` for the GRU and
//! `[i, f, g, o]` for the LSTM.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellKind {
    Rnn,
    Gru,
    Lstm,
}

impl CellKind {
    pub const ALL: [CellKind; 3] = [CellKind::Rnn, CellKind::Gru, CellKind::Lstm];

    pub fn gates(self) -> usize {
        match self {
            CellKind::Rnn => 1,
            CellKind::Gru => 3,
            CellKind::Lstm => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Rnn => "rnn",
            CellKind::Gru => "gru",
            CellKind::Lstm => "lstm",
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CellKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown recurrent kind {s:?} (known: rnn, gru, lstm)")))
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `out[r] += Σ_c m[r, c] x[c]` over `rows`.
fn matvec_add(m: &[f64], cols: usize, rows: std::ops::Range<usize>, x: &[f64], out: &mut [f64]) {
    for (o, r) in out.iter_mut().zip(rows) {
        *o += m[r * cols..(r + 1) * cols].iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    }
}

/// `out[c] += Σ_r m[r, c] a[r]` over `rows`.
fn matvec_t_add(m: &[f64], cols: usize, rows: std::ops::Range<usize>, a: &[f64], out: &mut [f64]) {
    for (&ar, r) in a.iter().zip(rows) {
        if ar != 0.0 {
            for (o, v) in out.iter_mut().zip(&m[r * cols..(r + 1) * cols]) {
                *o += ar * v;
            }
        }
    }
}

/// `g[r, c] += a[r] b[c]` over `rows`.
fn outer_add(g: &mut [f64], cols: usize, rows: std::ops::Range<usize>, a: &[f64], b: &[f64]) {
    for (&ar, r) in a.iter().zip(rows) {
        if ar != 0.0 {
            for (o, v) in g[r * cols..(r + 1) * cols].iter_mut().zip(b) {
                *o += ar * v;
            }
        }
    }
}

/// Borrowed parameters of one cell.
#[derive(Clone, Copy)]
pub(crate) struct CellRef<'a> {
    pub kind: CellKind,
    pub input_dim: usize,
    pub hidden: usize,
    pub w: &'a [f64],
    pub u: &'a [f64],
    pub b: &'a [f64],
}

pub(crate) struct CellGrad<'a> {
    pub w: &'a mut [f64],
    pub u: &'a mut [f64],
    pub b: &'a mut [f64],
}

/// What a forward step keeps for its backward pass.
#[derive(Debug, Clone)]
pub(crate) struct Step {
    /// Post-activation gate values, `G·H` entries.
    pub gates: Vec<f64>,
    pub h: Vec<f64>,
    /// Cell state (LSTM only; empty otherwise).
    pub c: Vec<f64>,
}

impl CellRef<'_> {
    pub fn forward(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Step {
        let h = self.hidden;
        let gh = self.kind.gates() * h;
        let mut a = self.b.to_vec();
        matvec_add(self.w, self.input_dim, 0..gh, x, &mut a);
        match self.kind {
            CellKind::Rnn => {
                matvec_add(self.u, h, 0..h, h_prev, &mut a);
                let out: Vec<f64> = a.iter().map(|v| v.tanh()).collect();
                Step {
                    gates: out.clone(),
                    h: out,
                    c: Vec::new(),
                }
            }
            CellKind::Gru => {
                matvec_add(self.u, h, 0..2 * h, h_prev, &mut a[..2 * h]);
                for v in &mut a[..2 * h] {
                    *v = sigmoid(*v);
                }
                let rh: Vec<f64> = a[h..2 * h].iter().zip(h_prev).map(|(r, hp)| r * hp).collect();
                matvec_add(self.u, h, 2 * h..3 * h, &rh, &mut a[2 * h..]);
                for v in &mut a[2 * h..] {
                    *v = v.tanh();
                }
                let out = (0..h)
                    .map(|k| {
                        let (z, n) = (a[k], a[2 * h + k]);
                        (1.0 - z) * h_prev[k] + z * n
                    })
                    .collect();
                Step {
                    gates: a,
                    h: out,
                    c: Vec::new(),
                }
            }
            CellKind::Lstm => {
                matvec_add(self.u, h, 0..gh, h_prev, &mut a);
                for (blk, v) in a.iter_mut().enumerate() {
                    *v = if blk / h == 2 { v.tanh() } else { sigmoid(*v) };
                }
                let c: Vec<f64> = (0..h)
                    .map(|k| a[h + k] * c_prev[k] + a[k] * a[2 * h + k])
                    .collect();
                let out = (0..h).map(|k| a[3 * h + k] * c[k].tanh()).collect();
                Step { gates: a, h: out, c }
            }
        }
    }

    /// Accumulates parameter gradients into `g` and adds the gradients with
    /// respect to `h_prev` (and `c_prev`) into `dh_prev` / `dc_prev`. When
    /// `dx` is given, the input gradient is added there as well.
    #[allow(clippy::too_many_arguments)]
    pub fn backward(
        &self,
        x: &[f64],
        h_prev: &[f64],
        c_prev: &[f64],
        step: &Step,
        dh: &[f64],
        dc: &[f64],
        g: &mut CellGrad<'_>,
        dh_prev: &mut [f64],
        dc_prev: &mut [f64],
        dx: Option<&mut [f64]>,
    ) {
        let h = self.hidden;
        let gh = self.kind.gates() * h;
        let s = &step.gates;
        let mut da = vec![0.0; gh];
        match self.kind {
            CellKind::Rnn => {
                for k in 0..h {
                    da[k] = dh[k] * (1.0 - s[k] * s[k]);
                }
                outer_add(g.u, h, 0..h, &da, h_prev);
                matvec_t_add(self.u, h, 0..h, &da, dh_prev);
            }
            CellKind::Gru => {
                for k in 0..h {
                    let (z, n) = (s[k], s[2 * h + k]);
                    da[2 * h + k] = dh[k] * z * (1.0 - n * n);
                    dh_prev[k] += dh[k] * (1.0 - z);
                }
                let rh: Vec<f64> = (0..h).map(|k| s[h + k] * h_prev[k]).collect();
                outer_add(g.u, h, 2 * h..3 * h, &da[2 * h..], &rh);
                let mut d_rh = vec![0.0; h];
                matvec_t_add(self.u, h, 2 * h..3 * h, &da[2 * h..], &mut d_rh);
                for k in 0..h {
                    let (z, r, n) = (s[k], s[h + k], s[2 * h + k]);
                    da[k] = dh[k] * (n - h_prev[k]) * z * (1.0 - z);
                    da[h + k] = d_rh[k] * h_prev[k] * r * (1.0 - r);
                    dh_prev[k] += d_rh[k] * r;
                }
                outer_add(g.u, h, 0..2 * h, &da[..2 * h], h_prev);
                matvec_t_add(self.u, h, 0..2 * h, &da[..2 * h], dh_prev);
            }
            CellKind::Lstm => {
                for k in 0..h {
                    let (i, f, gg, o) = (s[k], s[h + k], s[2 * h + k], s[3 * h + k]);
                    let tc = step.c[k].tanh();
                    let dck = dc[k] + dh[k] * o * (1.0 - tc * tc);
                    da[k] = dck * gg * i * (1.0 - i);
                    da[h + k] = dck * c_prev[k] * f * (1.0 - f);
                    da[2 * h + k] = dck * i * (1.0 - gg * gg);
                    da[3 * h + k] = dh[k] * tc * o * (1.0 - o);
                    dc_prev[k] += dck * f;
                }
                outer_add(g.u, h, 0..gh, &da, h_prev);
                matvec_t_add(self.u, h, 0..gh, &da, dh_prev);
            }
        }
        for (gb, d) in g.b.iter_mut().zip(&da) {
            *gb += d;
        }
        outer_add(g.w, self.input_dim, 0..gh, &da, x);
        if let Some(dx) = dx {
            matvec_t_add(self.w, self.input_dim, 0..gh, &da, dx);
        }
    }
}

/// Owned parameters of one cell, in the stacked gate layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub kind: CellKind,
    pub input_dim: usize,
    pub hidden: usize,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

impl CellParams {
    pub fn zeros(kind: CellKind, input_dim: usize, hidden: usize) -> Self {
        let gh = kind.gates() * hidden;
        CellParams {
            kind,
            input_dim,
            hidden,
            w: vec![0.0; gh * input_dim],
            u: vec![0.0; gh * hidden],
            b: vec![0.0; gh],
        }
    }

    /// Every weight and bias set to `v`.
    pub fn constant(kind: CellKind, input_dim: usize, hidden: usize, v: f64) -> Self {
        let mut p = CellParams::zeros(kind, input_dim, hidden);
        p.w.iter_mut().chain(&mut p.u).for_each(|x| *x = v);
        p
    }

    pub fn validate(&self) -> Result<()> {
        let gh = self.kind.gates() * self.hidden;
        Error::check_dim(gh * self.input_dim, self.w.len())?;
        Error::check_dim(gh * self.hidden, self.u.len())?;
        Error::check_dim(gh, self.b.len())?;
        if self.w.iter().chain(&self.u).chain(&self.b).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("cell parameters must be finite".into()));
        }
        Ok(())
    }

    pub(crate) fn as_ref(&self) -> CellRef<'_> {
        CellRef {
            kind: self.kind,
            input_dim: self.input_dim,
            hidden: self.hidden,
            w: &self.w,
            u: &self.u,
            b: &self.b,
        }
    }

    fn checked_step(&self, kind: CellKind, x: &[f64], h: &[f64], c: &[f64]) -> Result<Step> {
        if self.kind != kind {
            return Err(Error::arg(format!("{} parameters passed to a {kind} cell", self.kind)));
        }
        self.validate()?;
        Error::check_dim(self.input_dim, x.len())?;
        Error::check_dim(self.hidden, h.len())?;
        Error::check_dim(self.hidden, c.len())?;
        Ok(self.as_ref().forward(x, h, c))
    }
}

/// `h' = tanh(W x + U h + b)`.
pub fn rnn_cell(x: &DenseVector, h: &DenseVector, p: &CellParams) -> Result<DenseVector> {
    p.checked_step(CellKind::Rnn, x, h, h).map(|s| DenseVector::from(s.h))
}

/// `z = σ(W_z x + U_z h + b_z)`, `r = σ(W_r x + U_r h + b_r)`,
/// `n = tanh(W_n x + U_n (r ⊙ h) + b_n)`, `h' = (1 − z) ⊙ h + z ⊙ n`.
pub fn gru_cell(x: &DenseVector, h: &DenseVector, p: &CellParams) -> Result<DenseVector> {
    p.checked_step(CellKind::Gru, x, h, h).map(|s| DenseVector::from(s.h))
}

/// `c' = f ⊙ c + i ⊙ g`, `h' = o ⊙ tanh(c')` with sigmoid gates `i, f, o`
/// and candidate `g = tanh(·)`.
pub fn lstm_cell(x: &DenseVector, state: (&DenseVector, &DenseVector), p: &CellParams) -> Result<(DenseVector, DenseVector)> {
    p.checked_step(CellKind::Lstm, x, state.0, state.1)
        .map(|s| (DenseVector::from(s.h), DenseVector::from(s.c)))
}
