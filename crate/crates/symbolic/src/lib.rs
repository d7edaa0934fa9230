//! Exact symbolic expectations over the Cholesky coordinates of two-qubit
//! density matrices, used to re-derive low-order moments by brute force.

pub mod expectation;
pub mod poly;
pub mod rho;
pub mod verify;

pub use expectation::{expect_power, expect_product, expectation, ExpectationRule, ProductStats};
pub use poly::{Monomial, MultivariatePolynomial};
pub use rho::{
    build_rho_symbolic, decompose_pt_diff, det_poly, partial_transpose, Field, PolyMatrix,
    PtDecomposition,
};
pub use verify::{
    verify_degenerate_conjecture, verify_degenerate_corollary, verify_f2, VerificationGrid,
    VerificationReport,
};

#[derive(Debug, thiserror::Error)]
pub enum SymbolicError {
    #[error("determinant needs a square matrix of size 1 to 4, got {0}")]
    NotSquare(usize),
    #[error("determinant of a self-adjoint matrix is not real")]
    NotReal,
    #[error("|ρ^PT| − |ρ| has x4 terms outside degrees 0 and 2")]
    DecompositionFailed,
    #[error("no symbolic rules for α = {0}; use 1/2 or 1")]
    UnsupportedAlpha(String),
    #[error("unsupported field {0:?}; use real or complex")]
    UnsupportedField(String),
    #[error("weight monomial must itself be admissible")]
    InadmissibleWeight,
    #[error("integer coefficient overflow")]
    Overflow,
    #[error("closed form: {0}")]
    Formula(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
