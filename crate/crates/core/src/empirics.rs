//! Empirical spectra and their agreement with the limiting laws.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autocov::{lag_autocov_with_cap, AutocovSet};
use crate::datagen::{generate_panel_stream, Dist, PanelSpec};
use crate::error::{Error, Result};
use crate::linalg::{sym_eigvals, Resolvent, Spectrum, Weight, DEFAULT_TOL};
use crate::lsd::{Law, LsdModel};

/// Number of evenly spaced points on `[0, 1.1·b]` added to the KS grid.
pub const KS_GRID_POINTS: usize = 512;
/// Default spectral argument for the trace diagnostics.
pub const DEFAULT_ALPHA: Complex64 = Complex64::new(1.0, 1.0);
/// Eigenvalues below `−NEGATIVE_TOL · max` violate positive semidefiniteness.
const NEGATIVE_TOL: f64 = 1e-8;

/// Eigenvalues of `A` (or `B`) for one experiment, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsdSample {
    eigenvalues: Vec<f64>,
    pub p: usize,
    pub t: usize,
    pub tau: usize,
    pub law: Law,
}

impl EsdSample {
    pub fn new(
        mut eigenvalues: Vec<f64>,
        p: usize,
        t: usize,
        tau: usize,
        law: Law,
    ) -> Result<Self> {
        eigenvalues.sort_by(f64::total_cmp);
        let max = eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
        if let Some(&lowest) = eigenvalues.first() {
            if lowest < -NEGATIVE_TOL * max.max(f64::MIN_POSITIVE) && lowest < 0.0 {
                return Err(Error::Invalid(format!(
                    "eigenvalue {lowest:e} is too negative for a PSD matrix (max {max:e})"
                )));
            }
        }
        eigenvalues.iter_mut().for_each(|v| *v = v.max(0.0));
        Ok(Self { eigenvalues, p, t, tau, law })
    }

    /// A-law sample from the spectrum of `A`. When `p > T` the `p − T`
    /// smallest values are structural zeros (`rank C ≤ T`) and are set to
    /// exactly 0.
    pub fn from_a_spectrum(spectrum: &Spectrum, p: usize, t: usize, tau: usize) -> Result<Self> {
        let mut values = spectrum.values().to_vec();
        let structural = p.saturating_sub(t);
        let n = values.len();
        values[n - structural.min(n)..].iter_mut().for_each(|v| *v = 0.0);
        Self::new(values, p, t, tau, Law::ALaw)
    }

    /// B-law sample derived from an A-law sample: the nonzero spectrum is
    /// shared, padded with `T − p` zeros or truncated to `T` values.
    pub fn to_b_law(&self) -> Result<Self> {
        let mut values: Vec<f64> = self.eigenvalues.iter().rev().take(self.t).copied().collect();
        values.resize(self.t, 0.0);
        Self::new(values, self.p, self.t, self.tau, Law::BLaw)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn c_hat(&self) -> f64 {
        self.p as f64 / self.t as f64
    }

    /// Fraction of eigenvalues `≤ u`.
    pub fn cdf(&self, u: f64) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        self.eigenvalues.partition_point(|&v| v <= u) as f64 / self.len() as f64
    }

    /// Fraction of eigenvalues `< u`.
    fn cdf_left(&self, u: f64) -> f64 {
        if self.eigenvalues.is_empty() {
            return 0.0;
        }
        self.eigenvalues.partition_point(|&v| v < u) as f64 / self.len() as f64
    }

    pub fn moment(&self, k: u32) -> f64 {
        self.eigenvalues.iter().map(|v| v.powi(k as i32)).sum::<f64>() / self.len() as f64
    }
}

pub fn esd_cdf(sample: &EsdSample, u: f64) -> f64 {
    sample.cdf(u)
}

/// Sup-distance between the sample's step CDF and the model CDF, taken over
/// both one-sided limits at every eigenvalue and a grid on `[0, 1.1·b]`.
pub fn ks_distance(sample: &EsdSample, model: &LsdModel) -> Result<f64> {
    if sample.law != model.law() {
        return Err(Error::LawMismatch { sample: sample.law, model: model.law() });
    }
    let grid_hi = 1.1 * model.b();
    let grid = (0..KS_GRID_POINTS).map(|i| grid_hi * i as f64 / (KS_GRID_POINTS - 1) as f64);
    let points: Vec<f64> = sample.eigenvalues().iter().copied().chain(grid).collect();
    let model_cdf = model.cdf_many(&points)?;
    let mass = model.point_mass_at_zero();
    let n_eig = sample.len();
    let mut worst = 0.0f64;
    for (i, (&u, &f)) in points.iter().zip(&model_cdf).enumerate() {
        worst = worst.max((sample.cdf(u) - f).abs());
        if i < n_eig {
            // Left limit; the model only jumps at the atom at zero.
            let f_left = if u == 0.0 { f - mass } else { f };
            worst = worst.max((sample.cdf_left(u) - f_left).abs());
        }
    }
    Ok(worst.min(1.0))
}

/// Two-sample KS distance between step CDFs.
pub fn ks_two_sample(a: &EsdSample, b: &EsdSample) -> f64 {
    a.eigenvalues()
        .iter()
        .chain(b.eigenvalues())
        .map(|&u| (a.cdf(u) - b.cdf(u)).abs().max((a.cdf_left(u) - b.cdf_left(u)).abs()))
        .fold(0.0, f64::max)
}

/// `(1/n)·Σ 1/(λᵢ − α)`.
pub fn empirical_stieltjes(sample: &EsdSample, alpha: Complex64) -> Result<Complex64> {
    if alpha.im == 0.0 {
        return Err(Error::RealAlpha("nonzero"));
    }
    let sum: Complex64 = sample.eigenvalues().iter().map(|&l| 1.0 / (l - alpha)).sum();
    Ok(sum / sample.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaDiagnostic {
    pub k: usize,
    /// `(1/T)·tr(B⁻¹(α)·P₁ᵏ)`.
    pub x: Complex64,
    /// `(1/T)·tr(C̃·B⁻¹(α)·P₁ᵏ)` with `C̃ = XᵗX/T`.
    pub y: Complex64,
}

/// Shifted resolvent traces of `B` at each requested power.
pub fn lemma_diagnostics(
    set: &AutocovSet,
    alpha: Complex64,
    powers: &[usize],
) -> Result<Vec<LemmaDiagnostic>> {
    let b = set.b_or_build();
    let resolvent = Resolvent::new(&b, alpha)?;
    let c_tilde = set.c_tilde();
    powers
        .iter()
        .map(|&k| {
            Ok(LemmaDiagnostic {
                k,
                x: resolvent.trace(Weight::Shift(k)).value,
                y: resolvent.weighted_trace(&c_tilde, Weight::Shift(k))?.value,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticEntry {
    pub k: usize,
    pub abs_xk: f64,
    pub abs_yk: f64,
}

impl From<LemmaDiagnostic> for DiagnosticEntry {
    fn from(d: LemmaDiagnostic) -> Self {
        Self { k: d.k, abs_xk: d.x.norm(), abs_yk: d.y.norm() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub p: usize,
    #[serde(rename = "T")]
    pub t: usize,
    pub tau: usize,
    pub c: f64,
    pub law: Law,
    pub dist: Dist,
    pub ks: f64,
    /// Empirical moments of orders 1..=4 of the pooled sample.
    pub moments_emp: Vec<f64>,
    /// Limiting-law moments of orders 1..=4.
    pub moments_lsd: Vec<f64>,
    pub diagnostics: Vec<DiagnosticEntry>,
    pub seed: u64,
    pub replicates: usize,
}

#[derive(Debug, Clone)]
pub struct ExperimentOptions {
    pub law: Law,
    /// Worker threads for replicates; `None` uses the global pool.
    pub jobs: Option<usize>,
    pub alpha: Complex64,
    /// Shift powers reported from the first replicate.
    pub diagnostic_powers: Vec<usize>,
    /// Diagnostics are skipped when `T` exceeds this.
    pub diagnostic_max_t: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            law: Law::ALaw,
            jobs: None,
            alpha: DEFAULT_ALPHA,
            diagnostic_powers: vec![1, 2],
            diagnostic_max_t: 1000,
        }
    }
}

struct Replicate {
    eigenvalues: Vec<f64>,
    diagnostics: Vec<DiagnosticEntry>,
}

fn run_replicate(spec: &PanelSpec, stream: u64, opts: &ExperimentOptions) -> Result<Replicate> {
    let panel = generate_panel_stream(spec, stream)?;
    let want_diag =
        stream == 0 && !opts.diagnostic_powers.is_empty() && spec.t <= opts.diagnostic_max_t;
    let set = lag_autocov_with_cap(&panel, if want_diag { spec.t } else { 0 });
    let spectrum = sym_eigvals(&set.a, DEFAULT_TOL)?;
    let diagnostics = if want_diag {
        lemma_diagnostics(&set, opts.alpha, &opts.diagnostic_powers)?
            .into_iter()
            .map(DiagnosticEntry::from)
            .collect()
    } else {
        Vec::new()
    };
    let sample = EsdSample::from_a_spectrum(&spectrum, spec.p, spec.t, spec.tau)?;
    Ok(Replicate { eigenvalues: sample.eigenvalues, diagnostics })
}

fn run_replicates(
    spec: &PanelSpec,
    replicates: usize,
    opts: &ExperimentOptions,
) -> Result<Vec<Replicate>> {
    let work = || -> Result<Vec<Replicate>> {
        (0..replicates as u64).into_par_iter().map(|r| run_replicate(spec, r, opts)).collect()
    };
    match opts.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Invalid(e.to_string()))?
            .install(work),
        None => work(),
    }
}

/// Eigenvalues of `A` pooled over `replicates` independent panels, as a
/// sample of the requested law.
pub fn pooled_sample(
    spec: &PanelSpec,
    replicates: usize,
    law: Law,
    jobs: Option<usize>,
) -> Result<EsdSample> {
    if replicates == 0 {
        return Err(Error::Invalid("replicates must be at least 1".into()));
    }
    spec.validate()?;
    let opts = ExperimentOptions { jobs, diagnostic_powers: Vec::new(), ..Default::default() };
    pool(spec, run_replicates(spec, replicates, &opts)?, law)
}

fn pool(spec: &PanelSpec, reps: Vec<Replicate>, law: Law) -> Result<EsdSample> {
    let (p, t) = (spec.p, spec.t);
    let mut a_law = Vec::with_capacity(p * reps.len());
    let mut b_law = Vec::new();
    for rep in reps {
        if law == Law::BLaw {
            let one = EsdSample::new(rep.eigenvalues.clone(), p, t, spec.tau, Law::ALaw)?;
            b_law.extend_from_slice(one.to_b_law()?.eigenvalues());
        }
        a_law.extend(rep.eigenvalues);
    }
    let values = match law {
        Law::ALaw => a_law,
        Law::BLaw => b_law,
    };
    EsdSample::new(values, p, t, spec.tau, law)
}

/// Generate → autocovariance → eigenvalues → fit, with replicates pooled
/// into one ESD. `c` is taken as `p/T`.
pub fn run_experiment(
    spec: &PanelSpec,
    replicates: usize,
    opts: &ExperimentOptions,
) -> Result<FitReport> {
    if replicates == 0 {
        return Err(Error::Invalid("replicates must be at least 1".into()));
    }
    spec.validate()?;
    let mut reps = run_replicates(spec, replicates, opts)?;
    let diagnostics = std::mem::take(&mut reps[0].diagnostics);
    let sample = pool(spec, reps, opts.law)?;
    let model = LsdModel::new(sample.c_hat(), opts.law)?;
    let ks = ks_distance(&sample, &model)?;
    let moments_emp = (1..=4).map(|k| sample.moment(k)).collect();
    let moments_lsd = (1..=4).map(|k| model.moment(k)).collect::<Result<Vec<_>>>()?;
    Ok(FitReport {
        p: spec.p,
        t: spec.t,
        tau: spec.tau,
        c: model.c(),
        law: opts.law,
        dist: spec.dist,
        ks,
        moments_emp,
        moments_lsd,
        diagnostics,
        seed: spec.seed,
        replicates,
    })
}
