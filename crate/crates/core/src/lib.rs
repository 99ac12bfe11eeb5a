//! Spectra of large-dimensional lag-τ sample autocovariance matrices.
//!
//! The crate simulates noise panels, forms the lag-τ sample autocovariance
//! `C_τ` and `A = C_τ·C_τᵗ`, computes their eigenvalues, and compares the
//! empirical spectrum against the closed-form limiting law at aspect ratio
//! `c = p/T`.
//!
//! ```
//! use autocov_spectra::lsd::{support_endpoints, Law, LsdModel};
//!
//! assert_eq!(support_endpoints(1.0).unwrap(), (0.0, 6.75));
//! let model = LsdModel::new(2.0, Law::ALaw).unwrap();
//! assert_eq!(model.point_mass_at_zero(), 0.5);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod autocov;
pub mod cli;
pub mod datagen;
pub mod empirics;
pub mod error;
pub mod factor;
pub mod linalg;
pub mod lsd;

pub use error::{Error, Result};
