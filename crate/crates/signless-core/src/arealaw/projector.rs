use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{ArealawError, Result};
use crate::rng::{self, Rng};

/// Eigenvalues at or below this count as zero.
const ZERO_EIG: f64 = 1e-8;

/// Smallest eigenvalue above zero; `None` for the zero operator.
pub fn smallest_nonzero_eigenvalue(o: &DMatrix<f64>) -> Option<f64> {
    let sym = (o + o.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().filter(|&l| l > ZERO_EIG).min_by(f64::total_cmp)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProjectorGap {
    /// `Δ(Q₀ + Q₁)`.
    pub lhs: Option<f64>,
    /// `½ Δ(Q₁ + (1−Q₁)Q₀(1−Q₁))`.
    pub rhs: Option<f64>,
    /// `Δ((1−Q₁)Q₀(1−Q₁))`.
    pub compressed: Option<f64>,
    pub ok: bool,
}

fn check_projector(q: &DMatrix<f64>) -> Result<()> {
    let residual = (q * q - q).amax().max((q - q.transpose()).amax());
    if residual > 1e-8 {
        return Err(ArealawError::NotProjector { residual });
    }
    Ok(())
}

/// Compares the gap of `Q₀ + Q₁` with half the gap of `Q₁ + (1−Q₁)Q₀(1−Q₁)`.
pub fn projector_gap_check(q0: &DMatrix<f64>, q1: &DMatrix<f64>) -> Result<ProjectorGap> {
    if !q0.is_square() || q0.shape() != q1.shape() {
        return Err(ArealawError::ShapeMismatch);
    }
    check_projector(q0)?;
    check_projector(q1)?;
    let n = q0.nrows();
    let c = DMatrix::identity(n, n) - q1;
    let compressed_op = &c * q0 * &c;
    let lhs = smallest_nonzero_eigenvalue(&(q0 + q1));
    let rhs = smallest_nonzero_eigenvalue(&(q1 + &compressed_op)).map(|x| 0.5 * x);
    let compressed = smallest_nonzero_eigenvalue(&compressed_op);
    let ok = match (lhs, rhs) {
        (Some(l), Some(r)) => l >= r - 1e-9,
        _ => true,
    };
    Ok(ProjectorGap { lhs, rhs, compressed, ok })
}

/// Projector onto the span of `rank` Gaussian vectors in dimension `n`.
pub fn random_projector<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> DMatrix<f64> {
    if rank == 0 {
        return DMatrix::zeros(n, n);
    }
    let g = DMatrix::from_fn(n, rank.min(n), |_, _| rng::normal(rng));
    let q = g.qr().q();
    &q * q.transpose()
}
