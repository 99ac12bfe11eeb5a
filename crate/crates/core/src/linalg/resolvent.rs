//! Normalized traces of shifted resolvents `(1/T)·tr(L·(M − αI)⁻¹·P₁ᵏ)`.
//!
//! The resolvent is formed once by complex LU with partial pivoting; traces
//! against any shift power or left weight are then O(T²) each.

use num_complex::Complex64;

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Right weight applied inside the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Identity,
    /// `P₁ᵏ`, the k-th power of the down-shift matrix.
    Shift(usize),
}

impl Weight {
    pub fn power(self) -> usize {
        match self {
            Weight::Identity => 0,
            Weight::Shift(k) => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexShiftedTrace {
    pub alpha: Complex64,
    pub value: Complex64,
}

/// LU factorization `P·A = L·U` of a square complex matrix.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    n: usize,
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    pub fn factor(n: usize, mut a: Vec<Complex64>) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::Dimension(format!("{} entries for {n}x{n}", a.len())));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot_mod) = (col..n)
                .map(|r| (r, a[r * n + col].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mod == 0.0 || !pivot_mod.is_finite() {
                return Err(Error::SingularPivot { index: col });
            }
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = a[col * n + col];
            for r in (col + 1)..n {
                let factor = a[r * n + col] / pivot;
                a[r * n + col] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (upper, lower) = a.split_at_mut(r * n);
                let pivot_row = &upper[col * n + col + 1..col * n + n];
                for (dst, &src) in lower[col + 1..n].iter_mut().zip(pivot_row) {
                    *dst -= factor * src;
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: Complex64 = row.iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: Complex64 = row.iter().zip(&x[i + 1..]).map(|(u, v)| u * v).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Dense inverse, row-major.
    pub fn inverse(&self) -> Vec<Complex64> {
        let n = self.n;
        let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            e[j] = Complex64::new(1.0, 0.0);
            let col = self.solve(&e);
            for (i, v) in col.into_iter().enumerate() {
                inv[i * n + j] = v;
            }
        }
        inv
    }
}

/// The resolvent `(M − αI)⁻¹` of a real square matrix.
#[derive(Debug, Clone)]
pub struct Resolvent {
    n: usize,
    alpha: Complex64,
    inv: Vec<Complex64>,
}

impl Resolvent {
    pub fn new(m: &Matrix, alpha: Complex64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "resolvent needs a square matrix, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if alpha.im == 0.0 {
            return Err(Error::RealAlpha("nonzero"));
        }
        let n = m.rows();
        let mut shifted: Vec<Complex64> =
            m.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        for i in 0..n {
            shifted[i * n + i] -= alpha;
        }
        let inv = ComplexLu::factor(n, shifted)?.inverse();
        Ok(Self { n, alpha, inv })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.inv[i * self.n + j]
    }

    /// `(1/n)·tr(R·P₁ᵏ) = (1/n)·Σⱼ R[j][j+k]`.
    pub fn trace(&self, weight: Weight) -> ComplexShiftedTrace {
        let k = weight.power();
        let n = self.n;
        let sum: Complex64 = (0..n.saturating_sub(k)).map(|j| self.at(j, j + k)).sum();
        ComplexShiftedTrace { alpha: self.alpha, value: sum / n as f64 }
    }

    /// `(1/n)·tr(L·R·P₁ᵏ) = (1/n)·Σⱼ Σₗ L[j][l]·R[l][j+k]`.
    pub fn weighted_trace(&self, left: &Matrix, weight: Weight) -> Result<ComplexShiftedTrace> {
        let n = self.n;
        if left.rows() != n || left.cols() != n {
            return Err(Error::Dimension(format!(
                "left weight is {}x{}, resolvent is {n}x{n}",
                left.rows(),
                left.cols()
            )));
        }
        let k = weight.power();
        let mut sum = Complex64::new(0.0, 0.0);
        for j in 0..n.saturating_sub(k) {
            let row = left.row(j);
            for (l, &w) in row.iter().enumerate() {
                if w != 0.0 {
                    sum += self.at(l, j + k) * w;
                }
            }
        }
        Ok(ComplexShiftedTrace { alpha: self.alpha, value: sum / n as f64 })
    }
}

/// `(1/T)·tr((M − αI)⁻¹·P₁ᵏ)` for a single weight.
pub fn complex_resolvent_trace(
    m: &Matrix,
    alpha: Complex64,
    weight: Weight,
) -> Result<ComplexShiftedTrace> {
    Ok(Resolvent::new(m, alpha)?.trace(weight))
}
