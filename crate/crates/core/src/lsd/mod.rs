//! Limiting spectral distributions of the lag-τ autocovariance matrices.
//!
//! Two laws are modelled, both indexed by the aspect ratio `c = lim p/T`:
//!
//! * the **B-law** `F̄`, limit of the spectrum of the `T × T` matrix `B`. Its
//!   Stieltjes transform `x(α)` solves
//!   `α²x³ − 2α(c−1)x² + ((c−1)² − α)x − 1 = 0`.
//!   It has an atom `1 − c` at the origin when `c < 1`.
//! * the **A-law** `F = F̄/c + (1 − 1/c)δ₀`, limit of the spectrum of the
//!   `p × p` matrix `A = C·Cᵗ` (squared singular values of `C`). Its
//!   transform `y(α)` solves `α²c²y³ + αc(c−1)y² − αy − 1 = 0`, and
//!   `x = (1 − c)(−1/α) + c·y`.
//!
//! The continuous part of `F̄` has density
//!
//! ```text
//! f(u) = (1/(πu))·{ −u − 5k²/3 + 2^{4/3}(3u+k²)k / (3·d^{1/3}) + 2^{2/3}k·d^{1/3}/3
//!                   + (1/48)·[−8k + 2·2^{1/3}(3u+k²)/d^{1/3} + 2^{2/3}d^{1/3}]² }^{1/2}
//! d(u) = −2k³ + 9(1+2c)u + 3√3·√(u(−4u² + (−1+4c(5+2c))u − 4ck³)),    k = c − 1
//! ```
//!
//! supported on `(0, b]` for `c ≤ 1` and `[a, b]` for `c > 1`, with
//! `a, b = (−1 + 20c + 8c² ∓ (1+8c)^{3/2}) / 8`. The A-law density is `f/c`.
//!
//! Density values are available from the closed form and, independently,
//! from Stieltjes inversion `Im x(u + iε)/π`.

mod cubic;
pub mod quadrature;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use cubic::Cubic;
use quadrature::{integrate, DEFAULT_ABS_TOL};

/// Default imaginary offset for the inversion route.
pub const INVERSION_EPS: f64 = 1e-7;
/// Largest tolerated gap between inversion at `ε` and at `2ε`.
pub const RICHARDSON_TOL: f64 = 1e-4;
/// Roots with `|Im|` below this are treated as real.
pub const IMAG_TOL: f64 = 1e-12;
/// Residual bound relative to `1 + |α|³`.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Below this the density for `c < 1` is extrapolated from the closed form.
pub const SMALL_U: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Law {
    /// Spectrum of `A = C·Cᵗ` (p × p).
    #[serde(rename = "A")]
    ALaw,
    /// Spectrum of `B` (T × T).
    #[serde(rename = "B")]
    BLaw,
}

impl std::str::FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Law::ALaw),
            "B" | "b" => Ok(Law::BLaw),
            other => Err(Error::Invalid(format!("unknown law {other:?}, expected A or B"))),
        }
    }
}

impl std::fmt::Display for Law {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Law::ALaw => "A",
            Law::BLaw => "B",
        })
    }
}

/// Raw support edges `(a, b)`. `a` is negative for `c < 1`.
pub fn raw_support_edges(c: f64) -> Result<(f64, f64)> {
    check_ratio(c)?;
    let s = (1.0 + 8.0 * c).sqrt();
    let base = -1.0 + 20.0 * c + 8.0 * c * c;
    let cube = s * s * s;
    Ok(((base - cube) / 8.0, (base + cube) / 8.0))
}

/// Edges of the continuous part: `(0, b)` for `c ≤ 1`, `(a, b)` otherwise.
pub fn support_endpoints(c: f64) -> Result<(f64, f64)> {
    let (a, b) = raw_support_edges(c)?;
    Ok((if c <= 1.0 { 0.0 } else { a }, b))
}

fn check_ratio(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidAspectRatio(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StieltjesSolution {
    pub alpha: Complex64,
    pub value: Complex64,
    pub law: Law,
    /// `|cubic(α, value)|`.
    pub residual: f64,
    pub roots: [Complex64; 3],
}

/// Stieltjes transform cubic of `law` at `alpha`.
pub fn stieltjes_cubic(alpha: Complex64, c: f64, law: Law) -> Cubic {
    let one = Complex64::new(1.0, 0.0);
    match law {
        Law::BLaw => {
            let k = c - 1.0;
            Cubic { c3: alpha * alpha, c2: -2.0 * alpha * k, c1: one * (k * k) - alpha, c0: -one }
        }
        Law::ALaw => {
            Cubic { c3: alpha * alpha * (c * c), c2: alpha * (c * (c - 1.0)), c1: -alpha, c0: -one }
        }
    }
}

/// The root of the law's cubic that is a Stieltjes transform.
///
/// For `Im α > 0` the cubic usually has two roots in the upper half plane.
/// A Stieltjes transform of a probability measure on `[0, ∞)` also satisfies
/// `Im(α·m(α)) ≥ 0`; exactly one root meets both conditions.
pub fn solve_stieltjes(alpha: Complex64, c: f64, law: Law) -> Result<StieltjesSolution> {
    check_ratio(c)?;
    if !(alpha.im > 0.0) {
        return Err(Error::RealAlpha("positive"));
    }
    let cubic = stieltjes_cubic(alpha, c, law);
    let roots = cubic.roots();
    let residual_bound = RESIDUAL_TOL * (1.0 + alpha.norm().powi(3));
    let admissible: Vec<(Complex64, f64)> = roots
        .iter()
        .filter(|z| {
            let az = alpha * *z;
            z.im > IMAG_TOL && az.im >= -IMAG_TOL * az.norm().max(1.0)
        })
        .map(|&z| (z, cubic.eval(z).norm()))
        .collect();
    let pick = match admissible.as_slice() {
        [] => return Err(Error::NoAdmissibleRoot { alpha, roots }),
        [one] => *one,
        many => {
            let good: Vec<_> = many.iter().filter(|(_, r)| *r <= residual_bound).collect();
            match good.as_slice() {
                [one] => **one,
                _ => return Err(Error::AmbiguousRoot { alpha, roots }),
            }
        }
    };
    Ok(StieltjesSolution { alpha, value: pick.0, law, residual: pick.1, roots })
}

/// Limiting law of one of the two matrices at aspect ratio `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsdModel {
    c: f64,
    law: Law,
    raw_a: f64,
    b: f64,
}

impl LsdModel {
    pub fn new(c: f64, law: Law) -> Result<Self> {
        let (raw_a, b) = raw_support_edges(c)?;
        Ok(Self { c, law, raw_a, b })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn law(&self) -> Law {
        self.law
    }

    /// Raw lower edge from the closed-form expression (negative for c < 1).
    pub fn a(&self) -> f64 {
        self.raw_a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Lower edge of the continuous part.
    pub fn lower_edge(&self) -> f64 {
        if self.c <= 1.0 {
            0.0
        } else {
            self.raw_a
        }
    }

    pub fn point_mass_at_zero(&self) -> f64 {
        match self.law {
            Law::BLaw => (1.0 - self.c).max(0.0),
            Law::ALaw => (1.0 - 1.0 / self.c).max(0.0),
        }
    }

    pub fn continuous_mass(&self) -> f64 {
        1.0 - self.point_mass_at_zero()
    }

    fn law_scale(&self) -> f64 {
        match self.law {
            Law::BLaw => 1.0,
            Law::ALaw => 1.0 / self.c,
        }
    }

    fn in_support(&self, u: f64) -> bool {
        u > self.lower_edge() && u < self.b
    }

    pub fn stieltjes(&self, alpha: Complex64) -> Result<StieltjesSolution> {
        solve_stieltjes(alpha, self.c, self.law)
    }

    /// Density of the continuous part from the closed form.
    ///
    /// If the closed form breaks down (`d(u) ≤ 0` or a clearly negative
    /// radicand) the inversion route is used instead.
    pub fn density(&self, u: f64) -> Result<f64> {
        if !self.in_support(u) {
            return Ok(0.0);
        }
        if self.c < 1.0 && u < SMALL_U {
            return Ok(self.small_u_density(u)? * self.law_scale());
        }
        match closed_form_b_density(u, self.c)? {
            Some(f) => Ok(f * self.law_scale()),
            None => {
                eprintln!(
                    "warning: closed-form density unavailable at u={u}, c={}; using inversion",
                    self.c
                );
                self.density_via_inversion_checked(u, INVERSION_EPS)
            }
        }
    }

    /// Below [`SMALL_U`] the closed form loses its digits to cancellation, so
    /// the B-law density is continued as a power law `f(u₀)·(u/u₀)^(−β)` with
    /// the local slope `β` measured over the decade below `u₀`.
    fn small_u_density(&self, u: f64) -> Result<f64> {
        let at = |v: f64| -> Result<f64> {
            closed_form_b_density(v, self.c)?.ok_or(Error::Invalid(format!(
                "closed-form density unavailable near the origin, c={}",
                self.c
            )))
        };
        let f0 = at(SMALL_U)?;
        let f1 = at(0.1 * SMALL_U)?;
        let beta = (f1 / f0).log10().clamp(0.5, 2.0 / 3.0);
        Ok(f0 * (u / SMALL_U).powf(-beta))
    }

    /// `Im m(u + iε)/π` for the law's Stieltjes transform `m`.
    pub fn density_via_inversion(&self, u: f64, eps: f64) -> Result<f64> {
        let sol = self.stieltjes(Complex64::new(u, eps))?;
        let mut value = sol.value.im / std::f64::consts::PI;
        // The atom at zero leaks mass·ε/(π(u²+ε²)) into the imaginary part.
        let mass = self.point_mass_at_zero();
        if mass > 0.0 {
            value -= mass * eps / (std::f64::consts::PI * (u * u + eps * eps));
        }
        Ok(value.max(0.0))
    }

    /// Inversion at `ε`, rejected when it moves by more than
    /// [`RICHARDSON_TOL`] between `ε` and `2ε`.
    pub fn density_via_inversion_checked(&self, u: f64, eps: f64) -> Result<f64> {
        let f1 = self.density_via_inversion(u, eps)?;
        let f2 = self.density_via_inversion(u, 2.0 * eps)?;
        if (f1 - f2).abs() >= RICHARDSON_TOL {
            return Err(Error::Invalid(format!(
                "inversion at u={u} not stable in eps: {f1} vs {f2}"
            )));
        }
        Ok(f1)
    }

    /// Density with the `u = t³` substitution applied; integrable at `t = 0`
    /// even where the density diverges at the origin.
    fn cube_substituted(&self, t: f64) -> f64 {
        let u = t * t * t;
        if u <= 0.0 {
            return 0.0;
        }
        self.density(u).unwrap_or(f64::NAN) * 3.0 * t * t
    }

    /// `∫ density` over `(lo, hi)` clipped to the continuous support.
    pub fn continuous_integral(&self, lo: f64, hi: f64) -> Result<f64> {
        let lo = lo.max(self.lower_edge());
        let hi = hi.min(self.b);
        if hi <= lo {
            return Ok(0.0);
        }
        let r = if self.lower_edge() == 0.0 {
            integrate(|t| self.cube_substituted(t), lo.cbrt(), hi.cbrt(), DEFAULT_ABS_TOL)?
        } else {
            integrate(|u| self.density(u).unwrap_or(f64::NAN), lo, hi, DEFAULT_ABS_TOL)?
        };
        if !r.value.is_finite() {
            return Err(Error::Quadrature { lo, hi, estimate: r.value, error: r.error });
        }
        Ok(r.value)
    }

    pub fn cdf(&self, u: f64) -> Result<f64> {
        if u < 0.0 {
            return Ok(0.0);
        }
        if u >= self.b {
            return Ok(1.0);
        }
        let mass = self.point_mass_at_zero();
        Ok((mass + self.continuous_integral(0.0, u)?).clamp(0.0, 1.0))
    }

    /// CDF at many points, integrating each gap between sorted points once.
    pub fn cdf_many(&self, points: &[f64]) -> Result<Vec<f64>> {
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&i, &j| points[i].total_cmp(&points[j]));
        let mut out = vec![0.0; points.len()];
        let mass = self.point_mass_at_zero();
        let mut acc = 0.0;
        let mut last = self.lower_edge();
        for idx in order {
            let u = points[idx];
            out[idx] = if u < 0.0 {
                0.0
            } else if u >= self.b {
                1.0
            } else {
                if u > last {
                    acc += self.continuous_integral(last, u)?;
                    last = u;
                }
                (mass + acc).clamp(0.0, 1.0)
            };
        }
        Ok(out)
    }

    /// `∫ u^k dF(u)`; the atom at zero only contributes to `k = 0`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Ok(1.0);
        }
        let (lo, hi) = (self.lower_edge(), self.b);
        let r = if lo == 0.0 {
            integrate(
                |t| {
                    let u = t * t * t;
                    self.cube_substituted(t) * u.powi(k as i32)
                },
                0.0,
                hi.cbrt(),
                DEFAULT_ABS_TOL,
            )?
        } else {
            integrate(
                |u| self.density(u).unwrap_or(f64::NAN) * u.powi(k as i32),
                lo,
                hi,
                DEFAULT_ABS_TOL,
            )?
        };
        Ok(r.value)
    }

    /// `m₁ = c` and `m₂ = c²(c+2)` for the A-law, scaled by `c` for the B-law.
    pub fn series_moment(&self, k: u32) -> Option<f64> {
        let c = self.c;
        let a_law = match k {
            0 => return Some(1.0),
            1 => c,
            2 => c * c * (c + 2.0),
            _ => return None,
        };
        Some(match self.law {
            Law::ALaw => a_law,
            Law::BLaw => c * a_law,
        })
    }

    /// `∫ dF(u)/(u − α)` by quadrature over the density plus the atom term.
    pub fn stieltjes_by_quadrature(&self, alpha: Complex64) -> Result<Complex64> {
        let (lo, hi) = (self.lower_edge(), self.b);
        let part = |pick_im: bool| -> Result<f64> {
            let g = |u: f64| {
                let v =
                    self.density(u).unwrap_or(f64::NAN) / Complex64::new(u - alpha.re, -alpha.im);
                if pick_im {
                    v.im
                } else {
                    v.re
                }
            };
            let r = if lo == 0.0 {
                integrate(|t| 3.0 * t * t * g(t * t * t), 0.0, hi.cbrt(), 1e-10)?
            } else {
                integrate(g, lo, hi, 1e-10)?
            };
            Ok(r.value)
        };
        let atom = -self.point_mass_at_zero() / alpha;
        Ok(Complex64::new(part(false)?, part(true)?) + atom)
    }

    /// `(u, density)` samples across the continuous support. For `c ≤ 1` a
    /// log-spaced run of points approaches the origin.
    pub fn density_curve(&self, n_points: usize) -> Result<Vec<(f64, f64)>> {
        if n_points < 2 {
            return Err(Error::Invalid(format!("need at least 2 points, got {n_points}")));
        }
        let (lo, hi) = (self.lower_edge(), self.b);
        let step = (hi - lo) / (n_points - 1) as f64;
        let mut us: Vec<f64> = Vec::with_capacity(n_points + n_points / 4);
        if lo == 0.0 {
            let refine = (n_points / 10).max(8);
            let (start, stop) = ((hi * 1e-6).ln(), step.ln());
            for i in 0..refine {
                us.push((start + (stop - start) * i as f64 / refine as f64).exp());
            }
            us.extend((1..n_points).map(|i| lo + step * i as f64));
        } else {
            us.extend((0..n_points).map(|i| lo + step * i as f64));
        }
        if let Some(last) = us.last_mut() {
            *last = hi;
        }
        us.into_iter().map(|u| Ok((u, self.density(u)?))).collect()
    }
}

/// Closed-form density of the B-law's continuous part.
///
/// `Ok(None)` means the closed form cannot be evaluated with the real cube
/// root (`d(u) ≤ 0`); the radicand is clamped at 0 when only rounding makes
/// it negative.
pub fn closed_form_b_density(u: f64, c: f64) -> Result<Option<f64>> {
    let k = c - 1.0;
    let quad_coef = -1.0 + 4.0 * c * (5.0 + 2.0 * c);
    let tail = 4.0 * c * k * k * k;
    let mut rad = u * (-4.0 * u * u + quad_coef * u - tail);
    let rad_scale = u.abs() * (4.0 * u * u + quad_coef.abs() * u.abs() + tail.abs());
    if rad < 0.0 {
        if rad < -1e-9 * rad_scale.max(1.0) {
            return Ok(None);
        }
        rad = 0.0;
    }
    let d = -2.0 * k * k * k + 9.0 * (1.0 + 2.0 * c) * u + 3.0 * 3f64.sqrt() * rad.sqrt();
    if !(d > 0.0) {
        return Ok(None);
    }
    let d3 = d.cbrt();
    let two13 = 2f64.cbrt();
    let two23 = two13 * two13;
    let lin = 3.0 * u + k * k;
    let bracket = -8.0 * k + 2.0 * two13 * lin / d3 + two23 * d3;
    let terms = [
        -u,
        -5.0 * k * k / 3.0,
        2.0 * two13 * lin * k / (3.0 * d3),
        two23 * k * d3 / 3.0,
        bracket * bracket / 48.0,
    ];
    let inner: f64 = terms.iter().sum();
    if inner < 0.0 {
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        if inner < -1e-9 * scale {
            return Err(Error::NegativeRadicand { u, value: inner });
        }
        return Ok(Some(0.0));
    }
    Ok(Some(inner.sqrt() / (std::f64::consts::PI * u)))
}
