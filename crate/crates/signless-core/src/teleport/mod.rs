//! Teleporting entanglement from `A–BC` to `A–C` by measuring `B`.

mod blocks;
mod diagnostics;
mod positivity;
mod uhlmann;

pub use blocks::{nonneg_projector_blocks, ProjectorBlock, ProjectorBlocks};
pub use diagnostics::{
    one_big_diagnostics, strict_decrease_scan, OneBigDiagnostics, SampleFamily, SampleRecord, ScanOptions, ScanReport,
};
pub use positivity::{
    construct_qubit_teleport_state, pair_balance, post_measurement_vectors, symmetrize_over_permutations,
    symmetrized_rho_ac, verify_residual, OutcomeVectors, PostMeasurementVectors, QubitConstruction, Symmetrized,
    VectorPair,
};
pub use uhlmann::{construct_no_positivity_state, uhlmann_decompose, UhlmannDecomposition};

use nalgebra::{Complex, DMatrix};
use serde::Serialize;
use thiserror::Error;

use crate::feasibility::FeasibilityError;
use crate::qstate::{
    factorization_defect, majorizes, measure_region, normalize_sites, partial_trace, von_neumann_entropy, StateError,
};
use crate::{Ket, SchmidtSpectrum, SiteLayout};

/// Equality threshold for post-measurement states.
pub const EQUAL_TOL: f64 = 1e-8;
/// Threshold below which a factorization defect certifies `ρ_AC = ρ_A ⊗ ρ_C`.
pub const FAC_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TeleportError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error("parts A, B, C must be disjoint, nonempty and cover all sites")]
    BadSplit,
    #[error("d_A must be at least 1")]
    BadDimension,
    #[error("target spectrum is not majorized by tau")]
    MajorizationViolated,
    #[error("spectrum infeasible for d_A = {d_a}")]
    Infeasible { d_a: usize },
    #[error("state is not non-negative")]
    NotNonneg,
    #[error("rho_A is singular (smallest eigenvalue {min_eig:e})")]
    SingularRhoA { min_eig: f64 },
    #[error("check `{check}` failed with residual {value:e}")]
    VerificationFailed { check: &'static str, value: f64 },
    #[error("not a projector (residual {residual:e})")]
    NotProjector { residual: f64 },
    #[error("negative matrix entry {0:e}")]
    NegativeEntry(f64),
    #[error("no non-negative pair in dimension {d} reaches inner product {s}")]
    InfeasiblePair { d: usize, s: f64 },
    #[error("no mixing weight solves the saturation equation")]
    NoMixingSolution,
    #[error("pair is not a pair of non-negative unit vectors with the required inner product")]
    BadPair,
    #[error("explicit permutation blow-up needs d_C <= 6, got {0}")]
    TooManyPermutations(usize),
}

pub type Result<T> = std::result::Result<T, TeleportError>;

/// Disjoint, exhaustive site sets `A`, `B`, `C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripartiteSplit {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl TripartiteSplit {
    pub fn new(layout: &SiteLayout, a: &[usize], b: &[usize], c: &[usize]) -> Result<Self> {
        let n = layout.n_sites();
        let mut parts = Vec::with_capacity(3);
        for p in [a, b, c] {
            let mut p = normalize_sites(p, n).map_err(|_| TeleportError::BadSplit)?;
            p.sort_unstable();
            parts.push(p);
        }
        let mut all: Vec<usize> = parts.concat();
        all.sort_unstable();
        if all != (0..n).collect::<Vec<_>>() {
            return Err(TeleportError::BadSplit);
        }
        let c = parts.pop().unwrap();
        let b = parts.pop().unwrap();
        let a = parts.pop().unwrap();
        Ok(Self { a, b, c })
    }

    /// Three-site layout `(A, B, C)`.
    pub fn three_site() -> Self {
        Self { a: vec![0], b: vec![1], c: vec![2] }
    }

    pub fn dims(&self, layout: &SiteLayout) -> (usize, usize, usize) {
        (layout.dim_of(&self.a), layout.dim_of(&self.b), layout.dim_of(&self.c))
    }

    fn check(&self, layout: &SiteLayout) -> Result<()> {
        Self::new(layout, &self.a, &self.b, &self.c).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TeleportReport {
    pub factorization_defect: f64,
    pub equal_post_states: bool,
    /// `max_j ‖ρ_A(j) − ρ_A‖₁`.
    pub max_post_state_deviation: f64,
    /// `Σ_j P_j S(ρ_A(j))`, nats.
    pub avg_post_entropy: f64,
    pub s_a: f64,
    pub s_c: f64,
    /// `avg_post_entropy / max(S_A, S_C)`; `None` when both entropies vanish.
    pub ratio: Option<f64>,
    pub outcomes: usize,
    pub discarded_outcomes: usize,
}

impl TeleportReport {
    /// `avg_post_entropy / S_A`; equals 1 exactly when the post-measurement states all match `ρ_A`'s entropy budget.
    pub fn convexity_ratio(&self) -> Option<f64> {
        (self.s_a > 0.0).then(|| self.avg_post_entropy / self.s_a)
    }
}

/// Measures `B` and compares the post-measurement `A` states with `ρ_A`.
pub fn analyze(state: &Ket, split: &TripartiteSplit) -> Result<TeleportReport> {
    split.check(state.layout())?;
    let rho_a = partial_trace(state, &split.a)?;
    let rho_c = partial_trace(state, &split.c)?;
    let s_a = von_neumann_entropy(&rho_a)?;
    let s_c = von_neumann_entropy(&rho_c)?;
    let defect = factorization_defect(state, &split.a, &split.c)?;
    let ens = measure_region(state, &split.b)?;
    let local_a = ens.local_sites(&split.a)?;
    let mut avg = 0.0;
    let mut max_dev: f64 = 0.0;
    for o in &ens.outcomes {
        let r = partial_trace(&o.state, &local_a)?;
        max_dev = max_dev.max(r.trace_distance(&rho_a)?);
        avg += o.probability * von_neumann_entropy(&r)?;
    }
    let denom = s_a.max(s_c);
    Ok(TeleportReport {
        factorization_defect: defect,
        equal_post_states: max_dev < EQUAL_TOL,
        max_post_state_deviation: max_dev,
        avg_post_entropy: avg,
        s_a,
        s_c,
        ratio: (denom > 0.0).then(|| avg / denom),
        outcomes: ens.outcomes.len(),
        discarded_outcomes: ens.discarded,
    })
}

/// Whether `(1/d_A, …, 1/d_A, 0, …)` majorizes `spectrum`.
pub fn majorization_feasible(spectrum: &SchmidtSpectrum, d_a: usize) -> Result<bool> {
    if d_a < 1 {
        return Err(TeleportError::BadDimension);
    }
    let n = spectrum.len().max(d_a);
    let tau = SchmidtSpectrum::flat(d_a, n);
    Ok(majorizes(tau.coefficients(), &spectrum.padded(n))?)
}

/// Output of [`general_rho_a_reduction`].
#[derive(Debug, Clone)]
pub struct RhoAReduction {
    /// `ψ̃ ∝ (ρ_A^{-1/2} ⊗ 1) ψ`, whose `A` marginal is maximally mixed.
    pub state: Ket,
    pub defect_before: f64,
    pub defect_after: f64,
}

impl RhoAReduction {
    /// Both defects on the same side of [`FAC_TOL`].
    pub fn consistent(&self) -> bool {
        (self.defect_before < FAC_TOL) == (self.defect_after < FAC_TOL)
    }
}

/// Rescales `A` so that `ρ_A` becomes maximally mixed.
pub fn general_rho_a_reduction(state: &Ket, split: &TripartiteSplit) -> Result<RhoAReduction> {
    split.check(state.layout())?;
    let rho_a = partial_trace(state, &split.a)?;
    let (vals, vecs) = rho_a.eigen();
    let min = vals.last().copied().unwrap_or(0.0);
    if min <= 1e-10 {
        return Err(TeleportError::SingularRhoA { min_eig: min });
    }
    let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&l| Complex::new(1.0 / l.sqrt(), 0.0)),
    ));
    let m = &vecs * inv_sqrt * vecs.adjoint();
    let rest = state.layout().complement(&split.a);
    let psi = state.as_matrix(&split.a, &rest)?;
    let reduced = Ket::from_matrix(state.layout().clone(), &split.a, &rest, &(m * psi))?;
    Ok(RhoAReduction {
        defect_before: factorization_defect(state, &split.a, &split.c)?,
        defect_after: factorization_defect(&reduced, &split.a, &split.c)?,
        state: reduced,
    })
}

/// `ψ_{A B_L} ⊗ ψ_{B_R C}` on sites `(A, B_L, B_R, C)`, with `B = {B_L, B_R}`.
pub fn split_b_product(left: &Ket, right: &Ket) -> Result<(Ket, TripartiteSplit)> {
    if left.layout().n_sites() != 2 || right.layout().n_sites() != 2 {
        return Err(TeleportError::BadSplit);
    }
    let psi = left.tensor(right)?;
    let split = TripartiteSplit { a: vec![0], b: vec![1, 2], c: vec![3] };
    Ok((psi, split))
}
