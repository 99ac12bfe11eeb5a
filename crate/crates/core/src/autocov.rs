//! Lag-τ sample autocovariance and the matrices built from it.
//!
//! With `X = (ε_τ, …, ε_{T+τ−1})` and `Y = (ε_0, …, ε_{T−1})`, both `p × T`:
//!
//! ```text
//! C = X·Yᵗ / T            (p × p)
//! A = C·Cᵗ                (p × p, symmetric PSD)
//! B = Yᵗ·Y·Xᵗ·X / T²      (T × T)
//! ```
//!
//! `A` and `B` share their nonzero eigenvalues.

use crate::datagen::Panel;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// B is only materialized up to this many time points by default.
pub const DEFAULT_B_CAP: usize = 2000;

#[derive(Debug, Clone)]
pub struct AutocovSet {
    pub c: Matrix,
    pub a: Matrix,
    pub b: Option<Matrix>,
    pub x: Matrix,
    pub y: Matrix,
    pub tau: usize,
}

impl AutocovSet {
    pub fn p(&self) -> usize {
        self.c.rows()
    }

    pub fn t(&self) -> usize {
        self.x.cols()
    }

    /// `XᵗX / T`, the sum of outer products of the scaled rows of `X`.
    pub fn c_tilde(&self) -> Matrix {
        let t = self.t() as f64;
        self.x.transpose_matmul(&self.x).expect("X is p×T").scale(1.0 / t)
    }

    /// `YᵗY / T`.
    pub fn c_lagged(&self) -> Matrix {
        let t = self.t() as f64;
        self.y.transpose_matmul(&self.y).expect("Y is p×T").scale(1.0 / t)
    }

    pub fn b_or_build(&self) -> Matrix {
        self.b.clone().unwrap_or_else(|| build_b(&self.x, &self.y))
    }
}

pub fn lag_autocov(panel: &Panel) -> AutocovSet {
    lag_autocov_with_cap(panel, DEFAULT_B_CAP)
}

pub fn lag_autocov_with_cap(panel: &Panel, b_cap: usize) -> AutocovSet {
    let t = panel.t();
    let tau = panel.tau();
    let x = panel.data().columns(tau, t);
    let y = panel.data().columns(0, t);
    let c = x.matmul_transpose(&y).expect("X and Y share shape").scale(1.0 / t as f64);
    let a = c.matmul_transpose(&c).expect("C is square");
    let b = (t <= b_cap).then(|| build_b(&x, &y));
    AutocovSet { c, a, b, x, y, tau }
}

fn build_b(x: &Matrix, y: &Matrix) -> Matrix {
    let t = x.cols() as f64;
    let yty = y.transpose_matmul(y).expect("Y is p×T");
    let xtx = x.transpose_matmul(x).expect("X is p×T");
    yty.matmul(&xtx).expect("both T×T").scale(1.0 / (t * t))
}

/// `P₁ᵏ·v`: shift entries down by `k`, filling with zeros.
pub fn apply_shift(k: usize, v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut out = vec![0.0; n];
    if k < n {
        out[k..].copy_from_slice(&v[..n - k]);
    }
    out
}

/// Lag-1 sample autocovariance of the mean-centered observations:
/// `(1/T)·Σ_{j=1}^{T} (x_j − x̄)(x_{j−1} − x̄)ᵗ` with `T = columns − 1`.
/// The panel's own lag is ignored.
pub fn gamma_x(panel: &Panel) -> Result<Matrix> {
    gamma_x_matrix(panel.data())
}

pub fn gamma_x_matrix(data: &Matrix) -> Result<Matrix> {
    let cols = data.cols();
    if cols < 2 {
        return Err(Error::Invalid(format!("gamma_x needs at least 2 columns, got {cols}")));
    }
    let mut centered = data.clone();
    for i in 0..centered.rows() {
        let row = centered.row_mut(i);
        let mean = row.iter().sum::<f64>() / cols as f64;
        row.iter_mut().for_each(|v| *v -= mean);
    }
    let t = cols - 1;
    let x = centered.columns(1, t);
    let y = centered.columns(0, t);
    Ok(x.matmul_transpose(&y)?.scale(1.0 / t as f64))
}
