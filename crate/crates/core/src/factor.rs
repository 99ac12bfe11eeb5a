//! Dynamic factor model `x_i = Λ·f_i + ε_i + μ` and a factor count read off
//! the squared singular values of the lag-1 sample autocovariance.
//!
//! Noise comes from stream 0 of the seed, so it matches
//! `generate_panel(PanelSpec { p, t, tau: 1, dist, seed })`. Loadings and
//! factors come from stream 1.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::autocov::gamma_x;
use crate::datagen::{generate_panel, Dist, Panel, PanelSpec, Provenance};
use crate::error::{Error, Result};
use crate::linalg::{dot, sym_eigvals, Matrix, DEFAULT_TOL};
use crate::lsd::support_endpoints;

pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModelSpec {
    pub p: usize,
    pub t: usize,
    pub m: usize,
    pub loading_scale: f64,
    pub ar: f64,
    /// General mean; `None` means zero.
    pub mu: Option<Vec<f64>>,
    pub noise: Dist,
    pub seed: u64,
}

impl FactorModelSpec {
    pub fn new(p: usize, t: usize, m: usize, loading_scale: f64, ar: f64, seed: u64) -> Self {
        Self { p, t, m, loading_scale, ar, mu: None, noise: Dist::Gaussian, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m >= self.p {
            return Err(Error::InvalidSpec(format!("need m < p, got m={} p={}", self.m, self.p)));
        }
        if !(self.ar.abs() < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "AR coefficient must lie in (-1, 1), got {}",
                self.ar
            )));
        }
        if !(self.loading_scale >= 0.0) || !self.loading_scale.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "loading scale must be non-negative, got {}",
                self.loading_scale
            )));
        }
        if let Some(mu) = &self.mu {
            if mu.len() != self.p {
                return Err(Error::InvalidSpec(format!(
                    "mean has length {}, expected p={}",
                    mu.len(),
                    self.p
                )));
            }
        }
        self.noise_spec().validate()
    }

    fn noise_spec(&self) -> PanelSpec {
        PanelSpec::new(self.p, self.t, 1, self.noise, self.seed)
    }
}

/// A simulated panel together with its ingredients.
#[derive(Debug, Clone)]
pub struct FactorSimulation {
    pub panel: Panel,
    pub noise: Panel,
    /// `p × m`, columns of norm `loading_scale`.
    pub loadings: Matrix,
    /// `m × (T + 1)`, column `j` is `f_j`.
    pub factors: Matrix,
}

pub fn simulate_factor_panel(spec: &FactorModelSpec) -> Result<Panel> {
    Ok(simulate_factor_model(spec)?.panel)
}

pub fn simulate_factor_model(spec: &FactorModelSpec) -> Result<FactorSimulation> {
    spec.validate()?;
    let noise = generate_panel(&spec.noise_spec())?;
    let cols = spec.t + 1;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    let loadings = draw_loadings(spec, &mut rng);
    let factors = draw_factors(spec, &mut rng);

    let mut data = noise.data().clone();
    if spec.m > 0 {
        let signal = loadings.matmul(&factors)?;
        for i in 0..spec.p {
            for (v, s) in data.row_mut(i).iter_mut().zip(signal.row(i)) {
                *v += s;
            }
        }
    }
    if let Some(mu) = &spec.mu {
        for (i, shift) in mu.iter().enumerate() {
            data.row_mut(i).iter_mut().for_each(|v| *v += shift);
        }
    }
    debug_assert_eq!(data.cols(), cols);
    let panel =
        Panel::new(data, 1, Provenance::Derived(format!("factor model seed {}", spec.seed)))?;
    Ok(FactorSimulation { panel, noise, loadings, factors })
}

/// Gaussian `p × m` draw with entries of size `scale/√p`, orthonormalized by
/// modified Gram–Schmidt and rescaled so each column has norm `scale`.
fn draw_loadings(spec: &FactorModelSpec, rng: &mut ChaCha20Rng) -> Matrix {
    let (p, m) = (spec.p, spec.m);
    let entry = spec.loading_scale / (p as f64).sqrt();
    let mut cols: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..p)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    entry * z
                })
                .collect()
        })
        .collect();
    for j in 0..m {
        for i in 0..j {
            let proj = dot(&cols[j], &cols[i]);
            let (head, tail) = cols.split_at_mut(j);
            tail[0].iter_mut().zip(&head[i]).for_each(|(v, q)| *v -= proj * q);
        }
        let norm = dot(&cols[j], &cols[j]).sqrt();
        if norm > 0.0 {
            cols[j].iter_mut().for_each(|v| *v /= norm);
        }
    }
    Matrix::from_fn(p, m, |i, j| spec.loading_scale * cols[j][i])
}

/// Stationary AR(1) factors with unit-variance innovations.
fn draw_factors(spec: &FactorModelSpec, rng: &mut ChaCha20Rng) -> Matrix {
    let (m, cols) = (spec.m, spec.t + 1);
    let phi = spec.ar;
    let stationary_sd = 1.0 / (1.0 - phi * phi).sqrt();
    let mut f = Matrix::zeros(m, cols);
    for i in 0..m {
        let row = f.row_mut(i);
        let first: f64 = StandardNormal.sample(rng);
        row[0] = stationary_sd * first;
        for j in 1..cols {
            let shock: f64 = StandardNormal.sample(rng);
            row[j] = phi * row[j - 1] + shock;
        }
    }
    f
}

/// Number of eigenvalues of `Γ_x·Γ_xᵗ` above `b(p/T)·(1 + δ)`, where `b` is
/// the upper support edge of the noise-only limit.
pub fn estimate_num_factors(panel: &Panel, delta: f64) -> Result<usize> {
    Ok(factor_threshold_scan(panel, delta)?.count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorEstimate {
    pub count: usize,
    pub threshold: f64,
    pub c_hat: f64,
    /// Largest eigenvalues of `Γ_x·Γ_xᵗ`, descending.
    pub top_eigenvalues: Vec<f64>,
}

pub fn factor_threshold_scan(panel: &Panel, delta: f64) -> Result<FactorEstimate> {
    if !(delta >= 0.0) {
        return Err(Error::Invalid(format!("delta must be non-negative, got {delta}")));
    }
    let data = panel.data();
    if data.cols() < 2 {
        return Err(Error::Invalid("need at least 2 observations".into()));
    }
    let gamma = gamma_x(panel)?;
    let spectrum = sym_eigvals(&gamma.matmul_transpose(&gamma)?, DEFAULT_TOL)?;
    let c_hat = data.rows() as f64 / (data.cols() - 1) as f64;
    let (_, b) = support_endpoints(c_hat)?;
    let threshold = b * (1.0 + delta);
    let count = spectrum.values().iter().filter(|&&v| v > threshold).count();
    Ok(FactorEstimate {
        count,
        threshold,
        c_hat,
        top_eigenvalues: spectrum.values().iter().take(10).copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_factors_is_noise_plus_mean() {
        let mut spec = FactorModelSpec::new(5, 20, 0, 3.0, 0.5, 4);
        spec.mu = Some(vec![1.0, -2.0, 0.5, 0.0, 7.0]);
        let sim = simulate_factor_model(&spec).unwrap();
        for i in 0..5 {
            for j in 0..21 {
                let want = sim.noise.data()[(i, j)] + spec.mu.as_ref().unwrap()[i];
                assert_eq!(sim.panel.data()[(i, j)], want);
            }
        }
    }

    #[test]
    fn zero_loading_is_pure_noise() {
        let spec = FactorModelSpec::new(5, 20, 2, 0.0, 0.0, 4);
        let sim = simulate_factor_model(&spec).unwrap();
        assert_eq!(sim.panel.data(), sim.noise.data());
    }

    #[test]
    fn loadings_have_orthogonal_columns() {
        let spec = FactorModelSpec::new(30, 20, 3, 5.0, 0.5, 1);
        let sim = simulate_factor_model(&spec).unwrap();
        let gram = sim.loadings.transpose_matmul(&sim.loadings).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 25.0 } else { 0.0 };
                assert!((gram[(i, j)] - want).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn factor_series_is_autocorrelated() {
        let spec = FactorModelSpec::new(100, 200, 2, 5.0, 0.5, 9);
        let sim = simulate_factor_model(&spec).unwrap();
        for i in 0..2 {
            let f = sim.factors.row(i);
            let lag1: f64 = f.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / 200.0;
            assert!(lag1.abs() > 0.1, "lag-1 autocovariance {lag1}");
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(FactorModelSpec::new(5, 20, 1, 1.0, 1.0, 0).validate().is_err());
        assert!(FactorModelSpec::new(5, 20, 5, 1.0, 0.1, 0).validate().is_err());
        assert!(FactorModelSpec::new(5, 20, 1, -1.0, 0.1, 0).validate().is_err());
    }

    #[test]
    fn huge_delta_counts_nothing() {
        let spec = FactorModelSpec::new(40, 80, 2, 5.0, 0.5, 2);
        let panel = simulate_factor_panel(&spec).unwrap();
        assert_eq!(estimate_num_factors(&panel, 1e6).unwrap(), 0);
    }

    #[test]
    fn perturbation_rank_bounded() {
        let m = 2;
        let spec = FactorModelSpec::new(30, 60, m, 4.0, 0.6, 12);
        let sim = simulate_factor_model(&spec).unwrap();
        let diff = gamma_x(&sim.panel).unwrap().sub(&gamma_x(&sim.noise).unwrap()).unwrap();
        // Eigenvalues of [[0, D], [Dᵗ, 0]] are ±σᵢ(D).
        let p = diff.rows();
        let augmented = Matrix::from_fn(2 * p, 2 * p, |i, j| match (i < p, j < p) {
            (true, false) => diff[(i, j - p)],
            (false, true) => diff[(j, i - p)],
            _ => 0.0,
        });
        let sv = sym_eigvals(&augmented, 1e-14).unwrap();
        let lead = sv.max();
        assert!(lead > 1.0);
        for v in &sv.values()[3 * m..p] {
            assert!(v.abs() < 1e-8 * lead, "{v} vs {lead}");
        }
    }

    #[test]
    fn mean_shift_does_not_change_count() {
        let mut spec = FactorModelSpec::new(40, 80, 2, 5.0, 0.5, 3);
        let base =
            estimate_num_factors(&simulate_factor_panel(&spec).unwrap(), DEFAULT_DELTA).unwrap();
        spec.mu = Some((0..40).map(|i| 10.0 * i as f64 - 3.0).collect());
        let shifted =
            estimate_num_factors(&simulate_factor_panel(&spec).unwrap(), DEFAULT_DELTA).unwrap();
        assert_eq!(base, shifted);
    }
}
