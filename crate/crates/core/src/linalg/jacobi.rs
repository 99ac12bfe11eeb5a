//! Cyclic Jacobi eigenvalue iteration for real symmetric matrices.
//!
//! Each sweep visits every off-diagonal pair `(p, q)` once and applies the
//! plane rotation that zeroes `a[p][q]`. Iteration stops once the
//! off-diagonal Frobenius norm falls below `tol · ‖M‖_F`.

use super::matrix::Matrix;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_SWEEPS: usize = 100;
/// Relative asymmetry (against `‖M‖∞`) tolerated before symmetrizing.
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Eigenvalues of a symmetric matrix, sorted in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    tol: f64,
}

impl Spectrum {
    /// Wrap already computed eigenvalues; they are re-sorted descending.
    pub fn from_values(mut values: Vec<f64>, tol: f64) -> Self {
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values, tol }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    (2.0 * s).sqrt()
}

/// Eigenvalues of the symmetric matrix `m`.
///
/// Input asymmetry up to `1e-10 · ‖M‖∞` is absorbed by averaging with the
/// transpose; anything larger is rejected.
pub fn sym_eigvals(m: &Matrix, tol: f64) -> Result<Spectrum> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::Dimension(format!(
            "eigenvalues need a non-empty square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let norm_inf = m.inf_norm();
    let asymmetry = m.max_asymmetry();
    let allowed = SYMMETRY_TOL * norm_inf;
    if asymmetry > allowed {
        return Err(Error::NotSymmetric { asymmetry, tolerance: allowed });
    }
    let mut a = Matrix::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]));
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Ok(Spectrum::from_values(vec![0.0; n], tol));
    }
    let target = tol * scale;

    let mut residual = off_diagonal_norm(&a);
    let mut sweeps = 0;
    while residual > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, residual });
        }
        sweep(&mut a);
        sweeps += 1;
        residual = off_diagonal_norm(&a);
    }
    Ok(Spectrum::from_values((0..n).map(|i| a[(i, i)]).collect(), tol))
}

fn sweep(a: &mut Matrix) {
    let n = a.rows();
    for p in 0..n.saturating_sub(1) {
        for q in (p + 1)..n {
            let apq = a[(p, q)];
            if apq == 0.0 {
                continue;
            }
            let app = a[(p, p)];
            let aqq = a[(q, q)];
            // Skip entries that are already negligible against both diagonals.
            if apq.abs() < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                continue;
            }
            let theta = (aqq - app) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
            let c = 1.0 / t.hypot(1.0);
            let s = t * c;
            rotate(a, p, q, c, s);
            a[(p, p)] = app - t * apq;
            a[(q, q)] = aqq + t * apq;
            a[(p, q)] = 0.0;
            a[(q, p)] = 0.0;
        }
    }
}

#[inline]
fn rotate(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a[(k, p)] = new_p;
        a[(p, k)] = new_p;
        a[(k, q)] = new_q;
        a[(q, k)] = new_q;
    }
}
