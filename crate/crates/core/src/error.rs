use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state is not normalized: |psi|^2 = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("unsupported Hilbert space dimension {0} (expected 2, 3, 4 or 16)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: max |M - M^dagger| = {max_asymmetry:e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not unitary: max |U^dagger U - I| = {max_deviation:e}")]
    NotUnitary { max_deviation: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("unknown level label `{0}`")]
    UnknownLevel(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("phase profile is not monotonic on the integration interval")]
    NonMonotonicRamp,

    #[error("integration quality: norm drift {drift:e} exceeds {limit:e}; refine the time step")]
    IntegrationQuality { drift: f64, limit: f64 },

    #[error("step refinement did not converge after {halvings} halvings (last distance {distance:e})")]
    NotConverged { halvings: usize, distance: f64 },

    #[error("leakage {leakage:e} out of the computational subspace exceeds {limit}")]
    ExcessLeakage { leakage: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
