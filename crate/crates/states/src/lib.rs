//! Random two-qubit (and qubit–qutrit) density matrices over the real,
//! complex and quaternionic numbers, with Monte Carlo estimates of
//! separability statistics.

pub mod calibrate;
pub mod example;
pub mod field;
pub mod matrix;
pub mod sampler;
pub mod stats;

pub use calibrate::{calibrate_quaternion, Calibration, QUATERNION_CONVENTION};
pub use example::{example_family, ExampleState};
pub use field::{FieldKind, Quat, Scalar};
pub use matrix::{det_self_adjoint, partial_transpose, Mat, PtConvention};
pub use sampler::{
    sample_cholesky_hs, sample_degenerate, sample_qubit_qutrit, CholeskySampler,
    DensityMatrixSample, GinibreSampler,
};
pub use stats::{
    estimate_probabilities, sample_determinants, symmetry_check, write_samples_csv, Ensemble,
    Estimate, McConfig, SampleStats, SymmetryReport,
};

#[derive(Debug, thiserror::Error)]
pub enum StatesError {
    #[error("cannot split dimension {dim} as {dim_a} x {dim_b}")]
    BadBipartition {
        dim: usize,
        dim_a: usize,
        dim_b: usize,
    },
    #[error("not positive semidefinite: {0}")]
    NotPsd(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("i/o: {0}")]
    Io(String),
}
