//! Dense kernels: a row-major matrix, a cyclic Jacobi symmetric eigensolver,
//! and complex LU resolvent traces.

mod jacobi;
mod matrix;
mod resolvent;

pub use jacobi::{sym_eigvals, Spectrum, DEFAULT_TOL, MAX_SWEEPS, SYMMETRY_TOL};
pub(crate) use matrix::dot;
pub use matrix::Matrix;
pub use resolvent::{complex_resolvent_trace, ComplexLu, ComplexShiftedTrace, Resolvent, Weight};
