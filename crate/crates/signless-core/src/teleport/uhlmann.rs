use nalgebra::{Complex, DMatrix};
use serde::Serialize;

use super::{analyze, majorization_feasible, Result, TeleportError, TripartiteSplit, FAC_TOL};
use crate::qstate::majorizes;
use crate::{DensityMatrix, Ket, SchmidtSpectrum, SiteLayout};

const EQ_EPS: f64 = 1e-14;
const BIRKHOFF_EPS: f64 = 1e-13;

/// `target = Σ_v P(v) · (tau permuted by v)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UhlmannDecomposition {
    pub probabilities: Vec<f64>,
    /// `permutations[v][i]` is the tau index placed at label `i`.
    pub permutations: Vec<Vec<usize>>,
    pub tau: Vec<f64>,
    pub target: Vec<f64>,
    /// Number of T-transforms used to build the doubly stochastic matrix.
    pub transforms: usize,
}

impl UhlmannDecomposition {
    /// `tau` with permutation `v` applied.
    pub fn permuted_tau(&self, v: usize) -> Vec<f64> {
        self.permutations[v].iter().map(|&j| self.tau[j]).collect()
    }

    /// `Σ_v P(v) · permuted tau`.
    pub fn reconstruct(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.tau.len()];
        for (v, p) in self.probabilities.iter().enumerate() {
            for (o, t) in out.iter_mut().zip(self.permuted_tau(v)) {
                *o += p * t;
            }
        }
        out
    }

    /// Largest entrywise reconstruction error.
    pub fn residual(&self) -> f64 {
        self.reconstruct().iter().zip(&self.target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Writes `target` as a mixture of permutations of `tau` (requires `tau ≻ target`).
pub fn uhlmann_decompose(target: &SchmidtSpectrum, tau: &SchmidtSpectrum) -> Result<UhlmannDecomposition> {
    let n = target.len().max(tau.len());
    let x0 = tau.padded(n);
    let y = target.padded(n);
    if !majorizes(&x0, &y)? {
        return Err(TeleportError::MajorizationViolated);
    }
    let (d, transforms) = t_transform_chain(&x0, &y);
    let (probabilities, permutations) = birkhoff(d);
    let dec = UhlmannDecomposition { probabilities, permutations, tau: x0, target: y, transforms };
    let r = dec.residual();
    if r > 1e-10 {
        return Err(TeleportError::VerificationFailed { check: "uhlmann reconstruction", value: r });
    }
    Ok(dec)
}

/// Doubly stochastic `D` with `y = D x`, as a product of T-transforms.
fn t_transform_chain(x0: &[f64], y: &[f64]) -> (DMatrix<f64>, usize) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut d = DMatrix::<f64>::identity(n, n);
    let mut count = 0;
    while count < n {
        let Some(j) = (0..n).rev().find(|&i| x[i] > y[i] + EQ_EPS) else { break };
        let Some(k) = (j + 1..n).find(|&i| x[i] < y[i] - EQ_EPS) else { break };
        let delta = (x[j] - y[j]).min(y[k] - x[k]);
        let lambda = 1.0 - delta / (x[j] - x[k]);
        let mut t = DMatrix::<f64>::identity(n, n);
        t[(j, j)] = lambda;
        t[(k, k)] = lambda;
        t[(j, k)] = 1.0 - lambda;
        t[(k, j)] = 1.0 - lambda;
        d = &t * d;
        let (xj, xk) = (x[j], x[k]);
        x[j] = lambda * xj + (1.0 - lambda) * xk;
        x[k] = lambda * xk + (1.0 - lambda) * xj;
        count += 1;
    }
    (d, count)
}

/// Birkhoff–von Neumann decomposition of a doubly stochastic matrix.
fn birkhoff(mut d: DMatrix<f64>) -> (Vec<f64>, Vec<Vec<usize>>) {
    let n = d.nrows();
    let mut probs = Vec::new();
    let mut perms = Vec::new();
    let limit = (n.saturating_sub(1)).pow(2) + 1;
    while perms.len() < limit {
        let Some(perm) = perfect_matching(&d, BIRKHOFF_EPS) else { break };
        let w = (0..n).map(|i| d[(i, perm[i])]).fold(f64::INFINITY, f64::min);
        for i in 0..n {
            d[(i, perm[i])] -= w;
        }
        probs.push(w);
        perms.push(perm);
        if d.iter().all(|&x| x <= BIRKHOFF_EPS) {
            break;
        }
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    (probs, perms)
}

/// Row-to-column perfect matching on entries above `eps` (Kuhn's algorithm).
fn perfect_matching(d: &DMatrix<f64>, eps: f64) -> Option<Vec<usize>> {
    let n = d.nrows();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];
    fn augment(row: usize, d: &DMatrix<f64>, eps: f64, seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
        for col in 0..d.ncols() {
            if d[(row, col)] > eps && !seen[col] {
                seen[col] = true;
                if col_owner[col].map_or(true, |r| augment(r, d, eps, seen, col_owner)) {
                    col_owner[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }
    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(row, d, eps, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (col, owner) in col_owner.iter().enumerate() {
        perm[owner.expect("perfect matching")] = col;
    }
    Some(perm)
}

/// Builds a state on `(A, B, C)` with `ρ_AC = 1/d_A ⊗ ρ_C` whose post-measurement `A` states are all maximally mixed.
pub fn construct_no_positivity_state(rho_c: &DensityMatrix, d_a: usize) -> Result<Ket> {
    if d_a < 1 {
        return Err(TeleportError::BadDimension);
    }
    let (vals, vecs) = rho_c.eigen();
    let spectrum = SchmidtSpectrum::from_unsorted(vals)?;
    if !majorization_feasible(&spectrum, d_a)? {
        return Err(TeleportError::Infeasible { d_a });
    }
    let d_c = rho_c.dim();
    let tau = SchmidtSpectrum::flat(d_a, d_c);
    let dec = uhlmann_decompose(&spectrum, &tau)?;
    let k = dec.probabilities.len();
    let d_b = d_a * d_a * k;
    let layout = SiteLayout::new(vec![d_a, d_b, d_c])?;
    let mut amps = vec![Complex::new(0.0, 0.0); layout.total()];
    let omega = 2.0 * std::f64::consts::PI / d_a as f64;
    let norm = 1.0 / (d_a as f64 * (d_a as f64).sqrt());
    for (v, &p) in dec.probabilities.iter().enumerate() {
        let support: Vec<usize> =
            dec.permuted_tau(v).iter().enumerate().filter(|(_, &t)| t > 0.0).map(|(i, _)| i).collect();
        let amp = norm * p.sqrt();
        for t in 0..d_a {
            for u in 0..d_a {
                let b = (t * d_a + u) * k + v;
                for (a, &col) in support.iter().enumerate() {
                    let a2 = (a + u) % d_a;
                    let phase = Complex::from_polar(amp, omega * (t * a2) as f64);
                    for c in 0..d_c {
                        amps[layout.index(&[a2, b, c])] += phase * vecs[(c, col)];
                    }
                }
            }
        }
    }
    let psi = Ket::normalized(layout, amps)?;
    let report = analyze(&psi, &TripartiteSplit::three_site())?;
    if report.factorization_defect >= FAC_TOL {
        return Err(TeleportError::VerificationFailed { check: "factorization", value: report.factorization_defect });
    }
    if report.max_post_state_deviation >= FAC_TOL {
        return Err(TeleportError::VerificationFailed {
            check: "post-measurement states",
            value: report.max_post_state_deviation,
        });
    }
    Ok(psi)
}
