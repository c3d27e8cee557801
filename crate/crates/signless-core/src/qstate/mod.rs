//! Dense tensor-product states and operators.
//!
//! Amplitudes are stored row-major with site 0 varying slowest.

mod density;
mod ket;
mod layout;
mod measure;
mod spectral;

pub use density::{DensityMatrix, OneNorm};
pub use ket::Ket;
pub use layout::{normalize_sites, SiteLayout, DEFAULT_DIM_CAP};
pub use measure::{measure_region, MeasurementEnsemble, Outcome};
pub use spectral::{
    factorization_defect, majorizes, one_norm, partial_trace, schmidt_spectrum, von_neumann_entropy, SchmidtSpectrum,
    StateRef,
};

use thiserror::Error;

/// Eigenvalues at or below this are treated as zero.
pub const EIGEN_CUTOFF: f64 = 1e-12;
/// Default normalization tolerance.
pub const NORM_TOL: f64 = 1e-10;
/// Outcomes lighter than this are dropped from measurement ensembles.
pub const OUTCOME_CUTOFF: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("site list is empty")]
    EmptySites,
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("site {0} listed twice")]
    DuplicateSite(usize),
    #[error("local dimension must be at least 1")]
    ZeroDimension,
    #[error("total dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("state has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("cannot normalize a zero vector")]
    ZeroNorm,
    #[error("matrix not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("matrix has negative eigenvalue {min_eig:e}")]
    NotPsd { min_eig: f64 },
    #[error("trace {trace} differs from 1")]
    BadTrace { trace: f64 },
    #[error("sequence is not in descending order")]
    Unsorted,
    #[error("sequences have different totals ({a} vs {b})")]
    SumMismatch { a: f64, b: f64 },
    #[error("site subsets overlap")]
    Overlap,
    #[error("bipartition leaves one side empty")]
    DegenerateCut,
    #[error("region covers every site")]
    RegionIsEverything,
    #[error("layouts differ")]
    LayoutMismatch,
}

pub type Result<T> = std::result::Result<T, StateError>;
