//! Numerical toolkit for non-negative wavefunctions.
//!
//! The dense-state layer in [`qstate`] and the operator decompositions in
//! [`twist`] are generic over the real scalar type; the experiment modules
//! run in `f64`.

pub mod arealaw;
pub mod chain;
pub mod feasibility;
pub mod io;
pub mod qstate;
pub mod rng;
pub mod scalar;
pub mod teleport;
pub mod twist;

pub use nalgebra::Complex;
pub use qstate::SiteLayout;
pub use scalar::Real;

/// Pure state with `f64` amplitudes.
pub type Ket = qstate::Ket<f64>;
/// Density matrix with `f64` entries.
pub type DensityMatrix = qstate::DensityMatrix<f64>;
/// Schmidt spectrum in `f64`.
pub type SchmidtSpectrum = qstate::SchmidtSpectrum<f64>;
/// Measurement ensemble in `f64`.
pub type MeasurementEnsemble = qstate::MeasurementEnsemble<f64>;
/// Single precision pure state.
pub type Ket32 = qstate::Ket<f32>;
/// Single precision density matrix.
pub type DensityMatrix32 = qstate::DensityMatrix<f32>;

/// Complex `f64`.
pub type C64 = Complex<f64>;
