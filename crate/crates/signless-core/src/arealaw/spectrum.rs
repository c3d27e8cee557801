use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{ArealawError, FourSiteHamiltonian, Result};
use crate::rng::{self, Rng};

/// Largest dimension handled by the dense eigensolver.
pub const DENSE_LIMIT: usize = 6000;
/// Eigenvalues within this distance of the minimum form the ground cluster.
pub const GROUND_CLUSTER_TOL: f64 = 1e-9;

const MAX_LOW_PAIRS: usize = 12;
const LANCZOS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SolveMethod {
    Dense,
    Lanczos { max_residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub dim: usize,
    pub ground_energy: f64,
    pub ground_degeneracy: usize,
    /// First eigenvalue above the ground cluster minus the ground energy; `None` if the
    /// cluster is the whole spectrum.
    pub spectral_gap: Option<f64>,
    /// Entropy (nats) of the first end site in the uniform mixture over the ground space.
    pub end_site_entropy: f64,
    pub method: SolveMethod,
}

impl SpectrumReport {
    pub fn gapped(&self) -> bool {
        self.spectral_gap.is_some_and(|g| g > GROUND_CLUSTER_TOL)
    }
}

pub(crate) fn min_eigenvalue_dense(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    if n <= 64 {
        return SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    }
    let f = Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    f.selfadjoint_eigenvalues(Side::Lower).into_iter().fold(f64::INFINITY, f64::min)
}

/// Ground energy, degeneracy, gap and end-site entropy; dense up to [`DENSE_LIMIT`], Lanczos above.
pub fn spectrum_report(h: &FourSiteHamiltonian) -> Result<SpectrumReport> {
    spectrum_report_with(h, h.dim() > DENSE_LIMIT)
}

/// [`spectrum_report`] with the solver chosen by the caller.
pub fn spectrum_report_with(h: &FourSiteHamiltonian, iterative: bool) -> Result<SpectrumReport> {
    let n = h.dim();
    let (values, vectors, method) = if iterative { lanczos_low(h)? } else { dense_low(h) };
    let e0 = values[0];
    let g = values.iter().take_while(|&&v| v - e0 <= GROUND_CLUSTER_TOL).count();
    let gap = values.get(g).map(|v| v - e0);
    let d = h.dims()[0];
    let cols = n / d;
    let mut rho = DMatrix::<f64>::zeros(d, d);
    for v in vectors.iter().take(g) {
        let m = DMatrix::from_row_slice(d, cols, v);
        rho += &m * m.transpose();
    }
    rho /= g as f64;
    let entropy = SymmetricEigen::new(rho).eigenvalues.iter().filter(|&&p| p > 1e-15).map(|&p| -p * p.ln()).sum();
    Ok(SpectrumReport {
        dim: n,
        ground_energy: e0,
        ground_degeneracy: g,
        spectral_gap: gap,
        end_site_entropy: entropy,
        method,
    })
}

type LowPairs = (Vec<f64>, Vec<Vec<f64>>, SolveMethod);

fn dense_low(h: &FourSiteHamiltonian) -> LowPairs {
    let n = h.dim();
    let mut m = Mat::<f64>::zeros(n, n);
    h.for_each_entry(|r, c, v| m.write(r, c, m.read(r, c) + v));
    let evd = m.selfadjoint_eigendecomposition(Side::Lower);
    let s = evd.s().column_vector();
    let u = evd.u();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s.read(a).total_cmp(&s.read(b)));
    let values: Vec<f64> = order.iter().map(|&i| s.read(i)).collect();
    let e0 = values[0];
    let g = values.iter().take_while(|&&v| v - e0 <= GROUND_CLUSTER_TOL).count();
    let vectors = order[..g].iter().map(|&i| (0..n).map(|r| u.read(r, i)).collect()).collect();
    (values, vectors, SolveMethod::Dense)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(u, v)| *u += a * v);
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    orthogonalize2(v, basis, &[]);
}

/// Two passes of Gram–Schmidt against both sets.
fn orthogonalize2(v: &mut [f64], first: &[Vec<f64>], second: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in first.iter().chain(second) {
            let c = dot(v, b);
            axpy(v, -c, b);
        }
    }
}

/// Orthogonalizes and normalizes; `false` if less than 1e-6 of the norm survives.
fn extend(v: &mut [f64], first: &[Vec<f64>], second: &[Vec<f64>]) -> bool {
    let before = dot(v, v).sqrt();
    orthogonalize2(v, first, second);
    let after = normalize(v);
    after > 1e-6 * before && after > 0.0
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair orthogonal to `locked`: Lanczos directions with full
/// reorthogonalization, Rayleigh–Ritz on the projected matrix, explicit restarts.
fn lanczos_one(h: &FourSiteHamiltonian, locked: &[Vec<f64>], seed: u64) -> Result<(f64, Vec<f64>, f64)> {
    let n = h.dim();
    let krylov = (n - locked.len()).min(160);
    let mut r = rng::stream(seed, locked.len() as u64);
    let mut start: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let mut best = (f64::INFINITY, start.clone(), f64::INFINITY);
    for _ in 0..400 {
        orthogonalize(&mut start, locked);
        normalize(&mut start);
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut images: Vec<Vec<f64>> = Vec::new();
        while images.len() < basis.len() {
            let mut w = h.apply(&basis[images.len()]);
            images.push(w.clone());
            if basis.len() == krylov {
                break;
            }
            if !extend(&mut w, locked, &basis) {
                // Invariant subspace: continue with a fresh direction.
                w = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
                if !extend(&mut w, locked, &basis) {
                    break;
                }
            }
            basis.push(w);
        }
        let m = images.len();
        let t = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i])));
        let eig = SymmetricEigen::new(t);
        let (imin, &theta) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        let mut ritz = vec![0.0; n];
        let mut res = vec![0.0; n];
        for j in 0..m {
            let c = eig.eigenvectors[(j, imin)];
            axpy(&mut ritz, c, &basis[j]);
            axpy(&mut res, c, &images[j]);
        }
        axpy(&mut res, -theta, &ritz);
        orthogonalize(&mut res, locked);
        let residual = dot(&res, &res).sqrt();
        orthogonalize(&mut ritz, locked);
        normalize(&mut ritz);
        best = (theta, ritz.clone(), residual);
        if residual < LANCZOS_TOL {
            return Ok(best);
        }
        start = ritz;
    }
    Err(ArealawError::NoConvergence { residual: best.2 })
}

fn lanczos_low(h: &FourSiteHamiltonian) -> Result<LowPairs> {
    let mut values = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    let mut worst: f64 = 0.0;
    while vectors.len() < MAX_LOW_PAIRS {
        let (theta, v, res) = lanczos_one(h, &vectors, 0x1a2c)?;
        worst = worst.max(res);
        let above = values.first().is_some_and(|&e0: &f64| theta - e0 > GROUND_CLUSTER_TOL);
        values.push(theta);
        vectors.push(v);
        if above {
            break;
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let vectors = order.into_iter().map(|i| vectors[i].clone()).collect();
    Ok((values, vectors, SolveMethod::Lanczos { max_residual: worst }))
}
