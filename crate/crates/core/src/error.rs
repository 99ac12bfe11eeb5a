use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid panel spec: {0}")]
    InvalidSpec(String),

    #[error("row {row} has zero empirical variance")]
    ConstantRow { row: usize },

    #[error("csv parse error at ({row},{col}): {msg}")]
    CsvParse { row: usize, col: usize, msg: String },

    #[error("csv shape error: {0}")]
    CsvShape(String),

    #[error("matrix not symmetric: max asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("jacobi did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("singular pivot at column {index}")]
    SingularPivot { index: usize },

    #[error("imaginary part of alpha must be {0}")]
    RealAlpha(&'static str),

    #[error("aspect ratio must be positive, got {0}")]
    InvalidAspectRatio(f64),

    #[error("no admissible Stieltjes root at alpha={alpha}: roots {roots:?}")]
    NoAdmissibleRoot { alpha: Complex64, roots: [Complex64; 3] },

    #[error("ambiguous Stieltjes root at alpha={alpha}: roots {roots:?}")]
    AmbiguousRoot { alpha: Complex64, roots: [Complex64; 3] },

    #[error("negative density radicand {value:e} at u={u}")]
    NegativeRadicand { u: f64, value: f64 },

    #[error(
        "quadrature did not reach tolerance on [{lo}, {hi}]: estimate {estimate}, error {error:e}"
    )]
    Quadrature { lo: f64, hi: f64, estimate: f64, error: f64 },

    #[error("law mismatch: sample targets {sample:?}, model is {model:?}")]
    LawMismatch { sample: crate::lsd::Law, model: crate::lsd::Law },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Usage-style errors map to CLI exit code 2, everything else to 1.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec(_)
                | Error::InvalidAspectRatio(_)
                | Error::RealAlpha(_)
                | Error::Invalid(_)
        )
    }
}
