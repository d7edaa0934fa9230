//! Exact moment formulas and Legendre density reconstruction for two-qubit
//! separability probabilities.

pub mod exact;
pub mod moments;
pub mod reconstruct;
