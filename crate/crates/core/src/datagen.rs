//! Synthetic noise panels and panel ingestion.
//!
//! A panel is a `p × (T + τ)` matrix whose column `j` holds the observation
//! `ε_j`, indexed from 0.
//!
//! Random draws come from ChaCha20 (`rand_chacha::ChaCha20Rng`) seeded with
//! `seed_from_u64(seed)`. Replicate `r` of an experiment uses the same key on
//! stream `r` (`set_stream(r)`), so replicates are independent of each other
//! and of the order they run in. Entries are drawn row by row, left to right.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Entry distribution; every variant has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Dist {
    Gaussian,
    Rademacher,
    /// Uniform on `[−√3, √3]`.
    CenteredUniform,
    /// Student-t with `df` degrees of freedom scaled by `√((df − 2)/df)`.
    StandardizedStudentT {
        df: f64,
    },
}

impl Dist {
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            Dist::Gaussian => 3.0,
            Dist::Rademacher => 1.0,
            Dist::CenteredUniform => 1.8,
            Dist::StandardizedStudentT { df } => 3.0 * (df - 2.0) / (df - 4.0),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Dist::StandardizedStudentT { df } = *self {
            if !(df >= 5.0) {
                return Err(Error::InvalidSpec(format!(
                    "student-t needs df >= 5 for a finite fourth moment, got {df}"
                )));
            }
        }
        Ok(())
    }

    fn sampler(&self) -> Sampler {
        match *self {
            Dist::Gaussian => Sampler::Gaussian,
            Dist::Rademacher => Sampler::Rademacher,
            Dist::CenteredUniform => Sampler::Uniform,
            Dist::StandardizedStudentT { df } => Sampler::StudentT {
                dist: StudentT::new(df).expect("df validated"),
                scale: ((df - 2.0) / df).sqrt(),
            },
        }
    }
}

enum Sampler {
    Gaussian,
    Rademacher,
    Uniform,
    StudentT { dist: StudentT<f64>, scale: f64 },
}

impl Sampler {
    #[inline]
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        const SQRT3: f64 = 1.732_050_807_568_877_2;
        match self {
            Sampler::Gaussian => StandardNormal.sample(rng),
            Sampler::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Sampler::Uniform => rng.random_range(-SQRT3..SQRT3),
            Sampler::StudentT { dist, scale } => dist.sample(rng) * scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Entries are clipped at `eta · T^{1/4}`.
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub p: usize,
    pub t: usize,
    pub tau: usize,
    pub dist: Dist,
    pub seed: u64,
    pub truncation: Option<Truncation>,
}

impl PanelSpec {
    pub fn new(p: usize, t: usize, tau: usize, dist: Dist, seed: u64) -> Self {
        Self { p, t, tau, dist, seed, truncation: None }
    }

    pub fn with_truncation(mut self, eta: f64) -> Self {
        self.truncation = Some(Truncation { eta });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 || self.t == 0 || self.tau == 0 {
            return Err(Error::InvalidSpec(format!(
                "p, T and tau must be positive (p={}, T={}, tau={})",
                self.p, self.t, self.tau
            )));
        }
        if self.tau >= self.t {
            return Err(Error::InvalidSpec(format!(
                "tau must be smaller than T (tau={}, T={})",
                self.tau, self.t
            )));
        }
        if let Some(tr) = self.truncation {
            if !(tr.eta > 0.0) || !tr.eta.is_finite() {
                return Err(Error::InvalidSpec(format!("eta must be positive, got {}", tr.eta)));
            }
        }
        self.dist.validate()
    }
}

/// Where a panel came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    Generated { spec: PanelSpec, stream: u64 },
    Csv { path: PathBuf },
    Derived(String),
}

/// `p × (T + τ)` observation matrix; column `j` is `ε_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    data: Matrix,
    tau: usize,
    provenance: Provenance,
}

impl Panel {
    pub fn new(data: Matrix, tau: usize, provenance: Provenance) -> Result<Self> {
        if data.rows() == 0 {
            return Err(Error::InvalidSpec("panel needs at least one row".into()));
        }
        if tau == 0 {
            return Err(Error::InvalidSpec("tau must be positive".into()));
        }
        if data.cols() <= tau {
            return Err(Error::InvalidSpec(format!(
                "{} columns with tau={tau}: T would be {}",
                data.cols(),
                0
            )));
        }
        Ok(Self { data, tau, provenance })
    }

    pub fn data(&self) -> &Matrix {
        &self.data
    }

    pub fn into_data(self) -> Matrix {
        self.data
    }

    pub fn p(&self) -> usize {
        self.data.rows()
    }

    pub fn t(&self) -> usize {
        self.data.cols() - self.tau
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Same observations, reinterpreted with a different lag.
    pub fn with_tau(&self, tau: usize) -> Result<Panel> {
        Panel::new(self.data.clone(), tau, self.provenance.clone())
    }
}

pub fn generate_panel(spec: &PanelSpec) -> Result<Panel> {
    generate_panel_stream(spec, 0)
}

/// Panel drawn from stream `stream` of the spec's seed.
pub fn generate_panel_stream(spec: &PanelSpec, stream: u64) -> Result<Panel> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    let sampler = spec.dist.sampler();
    let cols = spec.t + spec.tau;
    let values: Vec<f64> = (0..spec.p * cols).map(|_| sampler.draw(&mut rng)).collect();
    let mut data = Matrix::from_vec(spec.p, cols, values)?;
    if let Some(tr) = spec.truncation {
        truncate(&mut data, tr.eta * (spec.t as f64).powf(0.25));
    }
    Panel::new(data, spec.tau, Provenance::Generated { spec: *spec, stream })
}

/// Clip at `±level`, then re-center and re-scale the whole panel to
/// empirical mean 0 and variance 1.
fn truncate(data: &mut Matrix, level: f64) {
    let rows = data.rows();
    for i in 0..rows {
        for v in data.row_mut(i) {
            *v = v.clamp(-level, level);
        }
    }
    let n = (rows * data.cols()) as f64;
    let mean = (0..rows).map(|i| data.row(i).iter().sum::<f64>()).sum::<f64>() / n;
    let var =
        (0..rows).map(|i| data.row(i).iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sum::<f64>()
            / n;
    let sd = var.sqrt();
    if sd > 0.0 {
        for i in 0..rows {
            for v in data.row_mut(i) {
                *v = (*v - mean) / sd;
            }
        }
    }
}

/// Center every row to mean 0 and scale it to variance 1 (divisor n).
pub fn standardize_panel(panel: &Panel) -> Result<Panel> {
    let mut data = panel.data.clone();
    let n = data.cols() as f64;
    for i in 0..data.rows() {
        let row = data.row_mut(i);
        let mean = row.iter().sum::<f64>() / n;
        let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        if var <= (f64::EPSILON * mean).powi(2) || var == 0.0 {
            return Err(Error::ConstantRow { row: i });
        }
        let sd = var.sqrt();
        row.iter_mut().for_each(|v| *v = (*v - mean) / sd);
    }
    Panel::new(data, panel.tau, panel.provenance.clone())
}

/// Read a numeric CSV with one variable per row and one time point per
/// column. The first column is `ε_0`. Error locations are 1-based.
pub fn read_panel_csv(path: impl AsRef<Path>, tau: usize, header: bool) -> Result<Panel> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let data = parse_panel_csv(&text, header)?;
    if tau == 0 {
        return Err(Error::InvalidSpec("tau must be positive".into()));
    }
    if data.cols() <= tau {
        return Err(Error::CsvShape(format!(
            "{} columns with tau={tau}: T would be 0",
            data.cols()
        )));
    }
    Panel::new(data, tau, Provenance::Csv { path: path.to_path_buf() })
}

pub fn parse_panel_csv(text: &str, header: bool) -> Result<Matrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::CsvParse { row, col: 0, msg: e.to_string() })?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::CsvParse {
                    row,
                    col: j + 1,
                    msg: format!("not a finite number: {cell:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(Error::CsvShape(format!(
                    "row {row} has {} columns, expected {}",
                    values.len(),
                    first.len()
                )));
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::CsvShape("no data rows".into()));
    }
    Matrix::from_rows(&rows)
}
