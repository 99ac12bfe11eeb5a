//! Globally adaptive 15-point Gauss–Kronrod integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
/// Gauss weights for the odd Kronrod nodes, center last.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_ABS_TOL: f64 = 1e-8;
pub const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Integral {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Integral { value: kronrod * half, error: ((kronrod - gauss) * half).abs() }
}

struct Piece {
    lo: f64,
    hi: f64,
    est: Integral,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Integrate `f` over `[lo, hi]` to absolute tolerance `tol`, bisecting the
/// piece with the largest error estimate until the total is within `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Integral> {
    if hi == lo {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    if hi < lo {
        let r = integrate(f, hi, lo, tol)?;
        return Ok(Integral { value: -r.value, error: r.error });
    }
    let first = gk15(&f, lo, hi);
    let mut total = first;
    let mut heap = BinaryHeap::new();
    heap.push(Piece { lo, hi, est: first });
    while !(total.error <= tol) {
        if heap.len() >= MAX_INTERVALS || !total.value.is_finite() || !total.error.is_finite() {
            return Err(Error::Quadrature { lo, hi, estimate: total.value, error: total.error });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // Cannot split further in floating point.
            return Err(Error::Quadrature { lo, hi, estimate: total.value, error: total.error });
        }
        let left = gk15(&f, worst.lo, mid);
        let right = gk15(&f, mid, worst.hi);
        total.value += left.value + right.value - worst.est.value;
        total.error += left.error + right.error - worst.est.error;
        heap.push(Piece { lo: worst.lo, hi: mid, est: left });
        heap.push(Piece { lo: mid, hi: worst.hi, est: right });
    }
    // Re-sum to shed drift from the incremental updates.
    let (value, error) =
        heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.est.value, e + p.est.error));
    Ok(Integral { value, error })
}
