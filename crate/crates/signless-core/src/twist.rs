//! Twist products of operators over disjoint regions.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

use crate::qstate::{Ket, StateError};
use crate::rng::{self, Rng};
use crate::scalar::{c, Real};
use crate::SiteLayout;

/// Largest total dimension accepted (12 qubits).
pub const TWIST_DIM_CAP: usize = 1 << 12;
/// Singular values below this (relative to the operator norm) are dropped.
pub const TRUNCATION: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TwistError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("regions overlap at site {0}")]
    Overlap(usize),
    #[error("no regions given")]
    NoRegions,
    #[error("operator acts outside the regions (residual {residual:e})")]
    SupportLeak { residual: f64 },
    #[error("need one ordering per region: expected {expected}, got {found}")]
    OrderingCount { expected: usize, found: usize },
    #[error("ordering {0} is not a permutation of the operators")]
    BadOrdering(usize),
    #[error("operator {0} has the wrong shape")]
    OperatorShape(usize),
    #[error("no operators given")]
    NoOperators,
    #[error("dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("state dimension does not match the operators")]
    Mismatch,
}

pub type Result<T> = std::result::Result<T, TwistError>;

type Op<T> = DMatrix<Complex<T>>;

/// Disjoint site sets `R₁..R_n`. Sites outside every region carry identities.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    layout: SiteLayout,
    regions: Vec<Vec<usize>>,
    rest: Vec<usize>,
}

impl RegionPartition {
    pub fn new(layout: SiteLayout, regions: Vec<Vec<usize>>) -> Result<Self> {
        if regions.is_empty() {
            return Err(TwistError::NoRegions);
        }
        if layout.total() > TWIST_DIM_CAP {
            return Err(TwistError::DimensionCap { dim: layout.total(), cap: TWIST_DIM_CAP });
        }
        let mut seen = vec![false; layout.n_sites()];
        let mut clean = Vec::with_capacity(regions.len());
        for r in &regions {
            let r = crate::qstate::normalize_sites(r, layout.n_sites())?;
            for &s in &r {
                if std::mem::replace(&mut seen[s], true) {
                    return Err(TwistError::Overlap(s));
                }
            }
            clean.push(r);
        }
        let rest = (0..layout.n_sites()).filter(|&s| !seen[s]).collect();
        Ok(Self { layout, regions: clean, rest })
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn regions(&self) -> &[Vec<usize>] {
        &self.regions
    }

    pub fn region_dims(&self) -> Vec<usize> {
        self.regions.iter().map(|r| self.layout.dim_of(r)).collect()
    }

    fn rest_dim(&self) -> usize {
        self.layout.dim_of(&self.rest)
    }

    /// Flat index in the order `R₁, …, R_n, rest` for every original flat index.
    fn permuted_index(&self) -> Vec<usize> {
        let order: Vec<usize> = self.regions.iter().flatten().chain(&self.rest).copied().collect();
        self.layout.split_indices(&order, &[]).into_iter().map(|(r, _)| r).collect()
    }

    fn to_region_order<T: Real>(&self, op: &Op<T>) -> Op<T> {
        let p = self.permuted_index();
        let n = op.nrows();
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(p[i], p[j])] = op[(i, j)];
            }
        }
        out
    }

    fn to_site_order<T: Real>(&self, op: &Op<T>) -> Op<T> {
        let p = self.permuted_index();
        DMatrix::from_fn(op.nrows(), op.ncols(), |i, j| op[(p[i], p[j])])
    }
}

/// One product term `coefficient · O_1 ⊗ … ⊗ O_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionTerm<T: Real> {
    pub coefficient: T,
    pub factors: Vec<Op<T>>,
}

/// `O = Σ_α c_α Π_a O_a^α`, obtained by iterated singular value decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDecomposition<T: Real> {
    pub terms: Vec<DecompositionTerm<T>>,
    /// Frobenius norm of what the truncation dropped.
    pub truncation_residual: T,
}

impl<T: Real> RegionDecomposition<T> {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ_α c_α ⊗_a O_a^α` in the partition's original site order.
    pub fn reconstruct(&self, partition: &RegionPartition) -> Op<T> {
        let dims = partition.region_dims();
        let n: usize = dims.iter().product();
        let mut acc = DMatrix::zeros(n, n);
        for t in &self.terms {
            acc += kron_all(&t.factors) * c(t.coefficient);
        }
        let full = acc.kronecker(&DMatrix::identity(partition.rest_dim(), partition.rest_dim()));
        partition.to_site_order(&full)
    }

    /// Same operator, different decomposition: every term's first factor is split into a
    /// random part and its remainder, and the factors are rescaled by random reciprocal weights.
    pub fn remixed(&self, seed: u64) -> Self {
        let mut r = rng::stream(seed, 0);
        let mut terms = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            let f0 = &t.factors[0];
            let x = DMatrix::from_fn(f0.nrows(), f0.ncols(), |_, _| {
                Complex::new(T::lit(rng::normal(&mut r)), T::lit(rng::normal(&mut r)))
            });
            for part in [x.clone(), f0 - &x] {
                let mut factors = t.factors.clone();
                factors[0] = part;
                if factors.len() > 1 {
                    let lambda = T::lit(r.random_range(0.5..2.0));
                    factors[0] *= c(lambda);
                    factors[1] *= c(T::one() / lambda);
                }
                terms.push(DecompositionTerm { coefficient: t.coefficient, factors });
            }
        }
        Self { terms, truncation_residual: self.truncation_residual }
    }
}

fn kron_all<T: Real>(ops: &[Op<T>]) -> Op<T> {
    let mut acc = ops[0].clone();
    for o in &ops[1..] {
        acc = acc.kronecker(o);
    }
    acc
}

fn frob<T: Real>(m: &Op<T>) -> T {
    m.iter().fold(T::zero(), |s, z| s + z.norm_sqr()).sqrt()
}

/// Splits `O` into orthonormal per-region factors.
pub fn region_decompose<T: Real>(op: &Op<T>, partition: &RegionPartition) -> Result<RegionDecomposition<T>> {
    let n = partition.layout().total();
    if op.nrows() != n || op.ncols() != n {
        return Err(TwistError::OperatorShape(0));
    }
    let permuted = partition.to_region_order(op);
    let rd = partition.rest_dim();
    let cd = n / rd;
    // O = O' ⊗ I_rest with O' the normalized partial trace over the rest.
    let reduced = DMatrix::from_fn(cd, cd, |i, j| {
        (0..rd).fold(Complex::new(T::zero(), T::zero()), |s, x| s + permuted[(i * rd + x, j * rd + x)])
            / c(T::lit(rd as f64))
    });
    let back = reduced.kronecker(&DMatrix::identity(rd, rd));
    let leak = frob(&(&permuted - back));
    let scale = frob(op).max(T::one());
    if leak > T::tol(1e-10) * scale {
        return Err(TwistError::SupportLeak { residual: leak.to_f64_lossy() });
    }
    let cutoff = T::lit(TRUNCATION) * frob(op);
    let mut dropped = T::zero();
    let raw = split(&reduced, &partition.region_dims(), cutoff, &mut dropped);
    let terms = raw.into_iter().map(|(coefficient, factors)| DecompositionTerm { coefficient, factors }).collect();
    Ok(RegionDecomposition { terms, truncation_residual: dropped.sqrt() })
}

fn split<T: Real>(op: &Op<T>, dims: &[usize], cutoff: T, dropped: &mut T) -> Vec<(T, Vec<Op<T>>)> {
    if dims.len() == 1 {
        let norm = frob(op);
        if norm <= cutoff {
            *dropped += norm * norm;
            return Vec::new();
        }
        return vec![(norm, vec![op / c(norm)])];
    }
    let d1 = dims[0];
    let dr: usize = dims[1..].iter().product();
    let m = DMatrix::from_fn(d1 * d1, dr * dr, |r, col| {
        let (i, ip) = (r / d1, r % d1);
        let (s, sp) = (col / dr, col % dr);
        op[(i * dr + s, ip * dr + sp)]
    });
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested");
    let vt = svd.v_t.expect("requested");
    let mut out = Vec::new();
    for (a, &sigma) in svd.singular_values.iter().enumerate() {
        if sigma <= cutoff {
            *dropped += sigma * sigma;
            continue;
        }
        let first = DMatrix::from_fn(d1, d1, |i, ip| u[(i * d1 + ip, a)]);
        let tail = DMatrix::from_fn(dr, dr, |s, sp| vt[(a, s * dr + sp)]);
        for (coef, mut factors) in split(&tail, &dims[1..], cutoff / sigma, dropped) {
            factors.insert(0, first.clone());
            out.push((sigma * coef, factors));
        }
    }
    out
}

/// Operators `O₁..O_k`, a partition and one ordering of `0..k` per region.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistSpec<T: Real> {
    operators: Vec<Op<T>>,
    partition: RegionPartition,
    orderings: Vec<Vec<usize>>,
}

impl<T: Real> TwistSpec<T> {
    pub fn new(operators: Vec<Op<T>>, partition: RegionPartition, orderings: Vec<Vec<usize>>) -> Result<Self> {
        let k = operators.len();
        if k == 0 {
            return Err(TwistError::NoOperators);
        }
        let n = partition.layout().total();
        if let Some(i) = operators.iter().position(|o| o.nrows() != n || o.ncols() != n) {
            return Err(TwistError::OperatorShape(i));
        }
        if orderings.len() != partition.regions().len() {
            return Err(TwistError::OrderingCount { expected: partition.regions().len(), found: orderings.len() });
        }
        for (a, p) in orderings.iter().enumerate() {
            let mut seen = vec![false; k];
            if p.len() != k || p.iter().any(|&x| x >= k || std::mem::replace(&mut seen[x], true)) {
                return Err(TwistError::BadOrdering(a));
            }
        }
        Ok(Self { operators, partition, orderings })
    }

    pub fn operators(&self) -> &[Op<T>] {
        &self.operators
    }

    pub fn partition(&self) -> &RegionPartition {
        &self.partition
    }

    pub fn orderings(&self) -> &[Vec<usize>] {
        &self.orderings
    }

    pub fn decompose(&self) -> Result<Vec<RegionDecomposition<T>>> {
        self.operators.iter().map(|o| region_decompose(o, &self.partition)).collect()
    }
}

/// `Σ_{α₁..α_k} ⊗_a O_{π_a(1),a}^{α_{π_a(1)}} ⋯ O_{π_a(k),a}^{α_{π_a(k)}}`.
pub fn twist_product<T: Real>(spec: &TwistSpec<T>) -> Result<Op<T>> {
    Ok(twist_product_with(&spec.decompose()?, spec.partition(), spec.orderings()))
}

/// Twist product from explicit decompositions of each operator.
pub fn twist_product_with<T: Real>(
    decomps: &[RegionDecomposition<T>],
    partition: &RegionPartition,
    orderings: &[Vec<usize>],
) -> Op<T> {
    let dims = partition.region_dims();
    let cd: usize = dims.iter().product();
    let mut acc = DMatrix::zeros(cd, cd);
    let k = decomps.len();
    if decomps.iter().all(|d| !d.is_empty()) {
        let mut choice = vec![0usize; k];
        loop {
            let coef = (0..k).fold(T::one(), |s, i| s * decomps[i].terms[choice[i]].coefficient);
            let per_region: Vec<Op<T>> = orderings
                .iter()
                .enumerate()
                .map(|(a, order)| {
                    let mut m = DMatrix::identity(dims[a], dims[a]);
                    for &i in order {
                        m *= &decomps[i].terms[choice[i]].factors[a];
                    }
                    m
                })
                .collect();
            acc += kron_all(&per_region) * c(coef);
            let mut i = 0;
            loop {
                if i == k {
                    let rd = partition.rest_dim();
                    let full = acc.kronecker(&DMatrix::identity(rd, rd));
                    return partition.to_site_order(&full);
                }
                choice[i] += 1;
                if choice[i] < decomps[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
        }
    }
    let n = partition.layout().total();
    DMatrix::zeros(n, n)
}

/// `⟨ψ| twist_product(spec) |ψ⟩`.
pub fn twist_expectation<T: Real>(state: &Ket<T>, spec: &TwistSpec<T>) -> Result<Complex<T>> {
    if state.layout() != spec.partition().layout() {
        return Err(TwistError::Mismatch);
    }
    let t = twist_product(spec)?;
    let v = state.amplitudes();
    Ok(v.dotc(&(t * v)))
}
