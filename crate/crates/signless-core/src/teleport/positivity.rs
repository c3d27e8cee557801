use nalgebra::DMatrix;
use serde::Serialize;

use super::{analyze, Result, TeleportError, TeleportReport, TripartiteSplit, EQUAL_TOL, FAC_TOL};
use crate::feasibility::{feasible_pair_search, lhs_ratio, FeasibilityQuery, SearchBudget};
use crate::qstate::{factorization_defect, measure_region, partial_trace};
use crate::{DensityMatrix, Ket, SiteLayout};

/// Post-measurement vectors `v_l(j)` for one outcome `j` of `B`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeVectors {
    pub index: usize,
    pub probability: f64,
    /// `vectors[l]` is `v_l(j)` on `C`.
    pub vectors: Vec<Vec<f64>>,
    pub one_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PostMeasurementVectors {
    pub d_a: usize,
    pub d_c: usize,
    pub outcomes: Vec<OutcomeVectors>,
    pub rho_a: Vec<Vec<f64>>,
    /// Sum of all entries of `ρ_C`.
    pub rho_c_entry_sum: f64,
    /// `Σ_j P_j |v_l(j)|₁ |v_m(j)|₁`.
    pub find_lhs: Vec<Vec<f64>>,
    /// `(ρ_A)_{lm} · |ρ⃗_C|₁`.
    pub find_rhs: Vec<Vec<f64>>,
    pub find_residual: f64,
    /// `2 Σ P_j |ṽ_l|₁|ṽ_m|₁ / Σ P_j (|ṽ_l|₁² + |ṽ_m|₁²)` with `ṽ = √d_A v`.
    pub sat_lhs: Vec<Vec<f64>>,
    /// `Σ_j P_j ⟨ṽ_m(j)|ṽ_l(j)⟩`.
    pub sat_rhs: Vec<Vec<f64>>,
    pub factorization_defect: f64,
    /// Whether `ρ_AC` factorizes, the premise of the 1-norm identity.
    pub outer_precondition_met: bool,
}

impl PostMeasurementVectors {
    /// `ṽ_l(j) = √d_A v_l(j)`.
    pub fn normalized(&self, j: usize, l: usize) -> Vec<f64> {
        let s = (self.d_a as f64).sqrt();
        self.outcomes[j].vectors[l].iter().map(|x| x * s).collect()
    }

    /// Largest `|⟨v_l(j)|v_m(j)⟩ − (ρ_A)_{lm}|` over outcomes.
    pub fn innerprod_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for o in &self.outcomes {
            for l in 0..self.d_a {
                for m in 0..self.d_a {
                    r = r.max((dot(&o.vectors[l], &o.vectors[m]) - self.rho_a[l][m]).abs());
                }
            }
        }
        r
    }

    /// Largest `|sat_lhs − sat_rhs|` over `l ≠ m`.
    pub fn sat_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for l in 0..self.d_a {
            for m in 0..self.d_a {
                if l != m {
                    r = r.max((self.sat_lhs[l][m] - self.sat_rhs[l][m]).abs());
                }
            }
        }
        r
    }
}

/// Vectors `v_l(j)` and both sides of the 1-norm and saturation identities.
pub fn post_measurement_vectors(state: &Ket, split: &TripartiteSplit) -> Result<PostMeasurementVectors> {
    if !state.is_nonneg() {
        return Err(TeleportError::NotNonneg);
    }
    split.check(state.layout())?;
    let (d_a, _, d_c) = split.dims(state.layout());
    let ens = measure_region(state, &split.b)?;
    let la = ens.local_sites(&split.a)?;
    let lc = ens.local_sites(&split.c)?;
    let mut outcomes = Vec::with_capacity(ens.outcomes.len());
    for o in &ens.outcomes {
        let m = o.state.as_matrix(&la, &lc)?;
        let vectors: Vec<Vec<f64>> = (0..d_a).map(|l| m.row(l).iter().map(|z| z.re).collect()).collect();
        let one_norms = vectors.iter().map(|v| v.iter().map(|x| x.abs()).sum()).collect();
        outcomes.push(OutcomeVectors { index: o.index, probability: o.probability, vectors, one_norms });
    }
    let rho_a_m = partial_trace(state, &split.a)?;
    let rho_c = partial_trace(state, &split.c)?;
    let rho_a: Vec<Vec<f64>> = (0..d_a).map(|l| (0..d_a).map(|m| rho_a_m.matrix()[(l, m)].re).collect()).collect();
    let rho_c_entry_sum: f64 = rho_c.matrix().iter().map(|z| z.norm()).sum();
    let sa = d_a as f64;
    let mut find_lhs = vec![vec![0.0; d_a]; d_a];
    let mut sat_num = vec![vec![0.0; d_a]; d_a];
    let mut sat_den = vec![vec![0.0; d_a]; d_a];
    let mut sat_rhs = vec![vec![0.0; d_a]; d_a];
    for o in &outcomes {
        for l in 0..d_a {
            for m in 0..d_a {
                let (nl, nm) = (o.one_norms[l], o.one_norms[m]);
                find_lhs[l][m] += o.probability * nl * nm;
                sat_num[l][m] += 2.0 * o.probability * sa * nl * nm;
                sat_den[l][m] += o.probability * sa * (nl * nl + nm * nm);
                sat_rhs[l][m] += o.probability * sa * dot(&o.vectors[m], &o.vectors[l]);
            }
        }
    }
    let find_rhs: Vec<Vec<f64>> = rho_a.iter().map(|row| row.iter().map(|x| x * rho_c_entry_sum).collect()).collect();
    let mut find_residual: f64 = 0.0;
    for l in 0..d_a {
        for m in 0..d_a {
            find_residual = find_residual.max((find_lhs[l][m] - find_rhs[l][m]).abs());
        }
    }
    let sat_lhs = (0..d_a)
        .map(|l| (0..d_a).map(|m| if sat_den[l][m] > 0.0 { sat_num[l][m] / sat_den[l][m] } else { 0.0 }).collect())
        .collect();
    let defect = factorization_defect(state, &split.a, &split.c)?;
    Ok(PostMeasurementVectors {
        d_a,
        d_c,
        outcomes,
        rho_a,
        rho_c_entry_sum,
        find_lhs,
        find_rhs,
        find_residual,
        sat_lhs,
        sat_rhs,
        factorization_defect: defect,
        outer_precondition_met: defect < FAC_TOL,
    })
}

/// Amplitudes `φ(i, j, k)` of a non-negative state as `[i][j][k]` over composite `A`, `B`, `C`.
fn tensor3(phi: &Ket, split: &TripartiteSplit) -> Result<(usize, usize, usize, Vec<f64>)> {
    split.check(phi.layout())?;
    let (d_a, d_b, d_c) = split.dims(phi.layout());
    let mut rows = split.a.clone();
    rows.extend_from_slice(&split.b);
    let m = phi.as_matrix(&rows, &split.c)?;
    let mut out = vec![0.0; d_a * d_b * d_c];
    for r in 0..d_a * d_b {
        for k in 0..d_c {
            out[r * d_c + k] = m[(r, k)].re;
        }
    }
    Ok((d_a, d_b, d_c, out))
}

/// `max |tr_C(σ_AC Π) − c σ_A|` with `Π` the projector on the uniform `C` vector and `c` fitted.
pub fn verify_residual(phi: &Ket, split: &TripartiteSplit) -> Result<f64> {
    let (d_a, d_b, d_c, t) = tensor3(phi, split)?;
    let at = |i: usize, j: usize, k: usize| t[(i * d_b + j) * d_c + k];
    let mut sigma = DMatrix::<f64>::zeros(d_a, d_a);
    let mut proj = DMatrix::<f64>::zeros(d_a, d_a);
    for j in 0..d_b {
        let sums: Vec<f64> = (0..d_a).map(|i| (0..d_c).map(|k| at(i, j, k)).sum()).collect();
        for l in 0..d_a {
            for m in 0..d_a {
                sigma[(l, m)] += (0..d_c).map(|k| at(l, j, k) * at(m, j, k)).sum::<f64>();
                proj[(l, m)] += sums[l] * sums[m] / d_c as f64;
            }
        }
    }
    let c = proj.trace() / sigma.trace();
    Ok((proj - sigma * c).abs().max())
}

/// Output of [`symmetrize_over_permutations`].
#[derive(Debug, Clone)]
pub struct Symmetrized {
    /// State on `(A, B × S_{d_C}, C)` as three composite sites.
    pub state: Ket,
    pub verify_residual: f64,
    pub factorization_defect: f64,
}

impl Symmetrized {
    pub fn verify_holds(&self) -> bool {
        self.verify_residual < FAC_TOL
    }
}

/// `ψ(i,(j,π),k) = φ(i,j,π(k)) / √(d_C!)`.
pub fn symmetrize_over_permutations(phi: &Ket, split: &TripartiteSplit) -> Result<Symmetrized> {
    if !phi.is_nonneg() {
        return Err(TeleportError::NotNonneg);
    }
    let (d_a, d_b, d_c, t) = tensor3(phi, split)?;
    if d_c > 6 {
        return Err(TeleportError::TooManyPermutations(d_c));
    }
    let perms = permutations(d_c);
    let np = perms.len();
    let layout = SiteLayout::new(vec![d_a, d_b * np, d_c])?;
    let scale = 1.0 / (np as f64).sqrt();
    let mut amps = vec![0.0; layout.total()];
    for i in 0..d_a {
        for j in 0..d_b {
            for (pi, p) in perms.iter().enumerate() {
                for k in 0..d_c {
                    amps[layout.index(&[i, j * np + pi, k])] = scale * t[(i * d_b + j) * d_c + p[k]];
                }
            }
        }
    }
    let state = Ket::from_real_normalized(layout, amps)?;
    let verify = verify_residual(phi, split)?;
    let defect = factorization_defect(&state, &[0], &[2])?;
    Ok(Symmetrized { state, verify_residual: verify, factorization_defect: defect })
}

/// `ρ_AC` of the symmetrized state computed directly by twirling `σ_AC` over `C` permutations.
pub fn symmetrized_rho_ac(phi: &Ket, split: &TripartiteSplit) -> Result<DensityMatrix> {
    if !phi.is_nonneg() {
        return Err(TeleportError::NotNonneg);
    }
    let mut ac = split.a.clone();
    ac.extend_from_slice(&split.c);
    let sigma = partial_trace(phi, &ac)?;
    let (d_a, _, d_c) = split.dims(phi.layout());
    let s = sigma.matrix();
    let mut out = DMatrix::zeros(d_a * d_c, d_a * d_c);
    for l in 0..d_a {
        for m in 0..d_a {
            let block = s.view((l * d_c, m * d_c), (d_c, d_c));
            let tr = block.trace();
            let sum = block.sum();
            let (alpha, beta) = if d_c == 1 {
                (tr, nalgebra::Complex::new(0.0, 0.0))
            } else {
                let beta = (sum - tr) / (d_c * (d_c - 1)) as f64;
                (tr / d_c as f64 - beta, beta)
            };
            for x in 0..d_c {
                for y in 0..d_c {
                    out[(l * d_c + x, m * d_c + y)] =
                        beta + if x == y { alpha } else { nalgebra::Complex::new(0.0, 0.0) };
                }
            }
        }
    }
    Ok(DensityMatrix::new(sigma.layout().clone(), out)?)
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else { break };
        let j = (i + 1..n).rev().find(|&j| p[j] > p[i]).unwrap();
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

/// Two non-negative unit vectors on `C`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorPair {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
}

impl VectorPair {
    pub fn inner(&self) -> f64 {
        dot(&self.v, &self.w)
    }

    pub fn lhs(&self) -> f64 {
        lhs_ratio(&self.v, &self.w).unwrap_or(f64::NAN)
    }

    fn validate(&self, d_c: usize, s: f64) -> Result<()> {
        let unit = |x: &[f64]| (dot(x, x).sqrt() - 1.0).abs() < 1e-9;
        let ok = self.v.len() == d_c
            && self.w.len() == d_c
            && self.v.iter().chain(&self.w).all(|&x| x >= 0.0)
            && unit(&self.v)
            && unit(&self.w)
            && (self.inner() - s).abs() < 1e-9;
        if ok {
            Ok(())
        } else {
            Err(TeleportError::BadPair)
        }
    }
}

/// `(|v|₁|w|₁, (|v|₁² + |w|₁²)/2)`.
pub fn pair_balance(p: &VectorPair) -> (f64, f64) {
    let a: f64 = p.v.iter().sum();
    let b: f64 = p.w.iter().sum();
    (a * b, 0.5 * (a * a + b * b))
}

/// Result of [`construct_qubit_teleport_state`].
#[derive(Debug, Clone)]
pub struct QubitConstruction {
    pub state: Ket,
    /// `tr(ρ_A X) / (2√(P↑P↓))`.
    pub s: f64,
    /// Weight of `pair1`.
    pub mixing: f64,
    pub pair1: VectorPair,
    pub pair2: VectorPair,
    pub report: TeleportReport,
}

/// Non-negative state with `A` a qubit, prescribed `ρ_A`, factorizing `ρ_AC` and equal post-measurement states.
///
/// `pair1` must lie on the `lhs ≥ s` side and `pair2` on the feasible side;
/// missing pairs are filled in (`pair2` by the feasibility search).
pub fn construct_qubit_teleport_state(
    rho_a: &DensityMatrix,
    d_c: usize,
    pair1: Option<VectorPair>,
    pair2: Option<VectorPair>,
) -> Result<QubitConstruction> {
    if rho_a.dim() != 2 {
        return Err(TeleportError::BadDimension);
    }
    let m = rho_a.matrix();
    for z in m.iter() {
        if z.re < -1e-12 || z.im.abs() > 1e-12 {
            return Err(TeleportError::NegativeEntry(z.re.min(-z.im.abs())));
        }
    }
    let (p_up, p_down) = (m[(0, 0)].re, m[(1, 1)].re);
    if p_up.min(p_down) <= 1e-12 {
        return Err(TeleportError::SingularRhoA { min_eig: p_up.min(p_down) });
    }
    let s = (m[(0, 1)].re / (p_up * p_down).sqrt()).min(1.0);
    let pair1 = match pair1 {
        Some(p) => p,
        None => {
            let mut v = vec![0.0; d_c];
            let mut w = vec![0.0; d_c];
            v[0] = 1.0;
            w[0] = s;
            if d_c > 1 {
                w[1] = (1.0 - s * s).max(0.0).sqrt();
            } else if s < 1.0 {
                return Err(TeleportError::BadPair);
            }
            VectorPair { v, w }
        }
    };
    let pair2 = match pair2 {
        Some(p) => p,
        None => {
            let q = FeasibilityQuery::new(d_c, s)?;
            match feasible_pair_search(q, &SearchBudget::default()).witness() {
                Some(w) => VectorPair { v: w.v.clone(), w: w.w.clone() },
                None => return Err(TeleportError::InfeasiblePair { d: d_c, s }),
            }
        }
    };
    pair1.validate(d_c, s)?;
    pair2.validate(d_c, s)?;
    if pair2.lhs() > s + 1e-10 {
        return Err(TeleportError::InfeasiblePair { d: d_c, s });
    }
    if pair1.lhs() < s - 1e-10 {
        return Err(TeleportError::BadPair);
    }
    let (a1, b1) = pair_balance(&pair1);
    let (a2, b2) = pair_balance(&pair2);
    let (f1, f2) = (a1 - s * b1, a2 - s * b2);
    let p = if f1 - f2 <= 1e-15 { 0.5 } else { -f2 / (f1 - f2) };
    if !(0.0..=1.0).contains(&p) {
        return Err(TeleportError::NoMixingSolution);
    }
    let branches = [
        (p / 2.0, &pair1.v, &pair1.w),
        (p / 2.0, &pair1.w, &pair1.v),
        ((1.0 - p) / 2.0, &pair2.v, &pair2.w),
        ((1.0 - p) / 2.0, &pair2.w, &pair2.v),
    ];
    let layout = SiteLayout::new(vec![2, branches.len(), d_c])?;
    let mut amps = vec![0.0; layout.total()];
    for (j, (pj, x, y)) in branches.iter().enumerate() {
        for k in 0..d_c {
            amps[layout.index(&[0, j, k])] = (pj * p_up).sqrt() * x[k];
            amps[layout.index(&[1, j, k])] = (pj * p_down).sqrt() * y[k];
        }
    }
    let phi = Ket::from_real_normalized(layout, amps)?;
    let split = TripartiteSplit::three_site();
    let sym = symmetrize_over_permutations(&phi, &split)?;
    let report = analyze(&sym.state, &split)?;
    if report.factorization_defect >= EQUAL_TOL {
        return Err(TeleportError::VerificationFailed { check: "factorization", value: report.factorization_defect });
    }
    if report.max_post_state_deviation >= EQUAL_TOL {
        return Err(TeleportError::VerificationFailed {
            check: "post-measurement states",
            value: report.max_post_state_deviation,
        });
    }
    Ok(QubitConstruction { state: sym.state, s, mixing: p, pair1, pair2, report })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
