//! Numerical laboratory for doubling indices, harmonic approximation and
//! critical-set coverings of divergence-form elliptic equations with Hölder
//! leading coefficients, in dimensions 2 and 3.
//!
//! The crate is `no_std` + `alloc`; all floating-point transcendentals go
//! through [`math`] (libm-backed) so results are identical between `std`
//! and bare-metal builds. IO, file formats and the CLI live in the
//! companion `critlab` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod approx;
pub mod cover;
pub mod doubling;
pub mod field;
pub mod geom;
pub mod green;
pub mod hhp;
pub mod math;
pub mod pde;
pub mod poly;
pub mod quad;
pub mod strata;

use alloc::string::String;

/// Errors reported by the laboratory's operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("dimension must be 2 or 3, got {0}")]
    BadDim(usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("matrix is not symmetric (asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("coefficient field audit failed: {0}")]
    FieldAudit(String),
    #[error("degenerate window: squared sphere average {0:.3e} below threshold")]
    DegenerateWindow(f64),
    #[error("query at distance {needed:.3e} exceeds domain clearance {have:.3e}")]
    OutOfDomain { needed: f64, have: f64 },
    #[error("linear solver did not converge: residual {residual:.3e} after {iterations} iterations")]
    SolverDiverged { residual: f64, iterations: usize },
    #[error("discrete operator is indefinite (p^T A p = {0:.3e})")]
    IndefiniteOperator(f64),
    #[error("five-point flux scheme requires diagonal leading coefficients (off-diagonal {0:.3e})")]
    NonDiagonalCoefficients(f64),
    #[error("polynomial is not homogeneous at the origin (residual {0:.3e})")]
    NotHomogeneous(f64),
    #[error("polynomial is not harmonic (Laplacian residual {0:.3e})")]
    NotHarmonic(f64),
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("vector is not unit length (|v| = {0})")]
    NonUnitVector(f64),
    #[error("{0}")]
    Unsupported(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("recursion depth cap {0} exceeded")]
    DepthCapExceeded(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
