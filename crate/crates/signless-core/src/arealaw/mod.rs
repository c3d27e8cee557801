//! Permutation-channel area-law counterexample on four sites.

mod channel;
mod hamiltonian;
mod projector;
mod scan;
mod spectrum;

pub use channel::{build_channel, channel_spectrum, ChannelSpectrum, Superoperator};
pub use hamiltonian::{
    build_base_hamiltonian, build_primed_hamiltonian, isometry_reduction_check, Component, FourSiteHamiltonian,
    IsometryCheck, LocalTerm,
};
pub use projector::{projector_gap_check, random_projector, smallest_nonzero_eigenvalue, ProjectorGap};
pub use scan::{scan_models, ScanConfig, ScanRow};
pub use spectrum::{
    spectrum_report, spectrum_report_with, SolveMethod, SpectrumReport, DENSE_LIMIT, GROUND_CLUSTER_TOL,
};

use serde::Serialize;
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArealawError {
    #[error("k must be even and at least 2, got {0}")]
    BadK(usize),
    #[error("end-site dimension must be even and at least 2, got {0}")]
    BadD(usize),
    #[error("expected {expected} permutations, got {found}")]
    PermCount { expected: usize, found: usize },
    #[error("permutation {0} is not a bijection of 0..d")]
    NotBijection(usize),
    #[error("permutation {0} is not the inverse of its partner")]
    PairingViolated(usize),
    #[error("mixing weight q={0} must lie in (0, 1)")]
    BadMixing(f64),
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix is not a projector (residual {residual:e})")]
    NotProjector { residual: f64 },
    #[error("operator shapes do not match")]
    ShapeMismatch,
    #[error("iterative eigensolver stalled (residual {residual:e})")]
    NoConvergence { residual: f64 },
}

pub type Result<T> = std::result::Result<T, ArealawError>;

/// Largest total Hilbert-space dimension accepted by the Hamiltonian builders.
pub const DIMENSION_CAP: usize = 1 << 16;

/// `k` permutations of `0..d`, paired so that `perms[a + k/2]` inverts `perms[a]`.
///
/// `perms[a][x]` is the image of `x`, i.e. `P_a e_x = e_{perms[a][x]}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpanderModel {
    d: usize,
    k: usize,
    perms: Vec<Vec<usize>>,
    q: f64,
}

impl ExpanderModel {
    pub fn new(d: usize, k: usize, perms: Vec<Vec<usize>>, q: f64) -> Result<Self> {
        if k < 2 || k % 2 != 0 {
            return Err(ArealawError::BadK(k));
        }
        if d < 2 || d % 2 != 0 {
            return Err(ArealawError::BadD(d));
        }
        if perms.len() != k {
            return Err(ArealawError::PermCount { expected: k, found: perms.len() });
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(ArealawError::BadMixing(q));
        }
        for (a, p) in perms.iter().enumerate() {
            let mut seen = vec![false; d];
            if p.len() != d || p.iter().any(|&x| x >= d || std::mem::replace(&mut seen[x], true)) {
                return Err(ArealawError::NotBijection(a));
            }
        }
        let h = k / 2;
        for a in 0..h {
            if (0..d).any(|x| perms[a + h][perms[a][x]] != x) {
                return Err(ArealawError::PairingViolated(a + h));
            }
        }
        Ok(Self { d, k, perms, q })
    }

    /// Draws `k/2` uniform permutations and appends their inverses.
    pub fn random(d: usize, k: usize, q: f64, seed: u64, attempt: u64) -> Result<Self> {
        if k < 2 || k % 2 != 0 {
            return Err(ArealawError::BadK(k));
        }
        let mut r = rng::stream_at(seed, &[d as u64, k as u64, attempt]);
        let mut perms: Vec<Vec<usize>> = (0..k / 2).map(|_| rng::permutation(&mut r, d)).collect();
        let inverses: Vec<Vec<usize>> = perms.iter().map(|p| inverse(p)).collect();
        perms.extend(inverses);
        Self::new(d, k, perms, q)
    }

    /// Every permutation the identity.
    pub fn identity(d: usize, k: usize, q: f64) -> Result<Self> {
        Self::new(d, k, vec![(0..d).collect(); k], q)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn perms(&self) -> &[Vec<usize>] {
        &self.perms
    }

    /// Whether `x` lies in the range of `Π` (first `d/2` coordinates).
    pub(crate) fn in_pi(&self, x: usize) -> bool {
        x < self.d / 2
    }
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        inv[y] = x;
    }
    inv
}
