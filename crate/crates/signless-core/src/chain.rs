//! One-dimensional non-negative chains and coherent Gibbs states.
//!
//! Sites are numbered `1..=L` throughout this module.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::qstate::{factorization_defect, measure_region, partial_trace, von_neumann_entropy, StateError};
use crate::rng::{self, Rng};
use crate::{Ket, SiteLayout};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error("chain state must be non-negative")]
    NotNonneg,
    #[error("chain sites must share one local dimension")]
    NonUniform,
    #[error("need at least {0} sites")]
    TooShort(usize),
    #[error("invalid site range i={i}, j={j} for L={l}")]
    BadRange { i: usize, j: usize, l: usize },
    #[error("gap {gap} too large for L={l}")]
    BadGap { gap: usize, l: usize },
    #[error("window {window} must satisfy 1 <= l < L={l}")]
    BadWindow { window: usize, l: usize },
    #[error("probabilities must be non-negative and sum to 1 (total {0})")]
    BadDistribution(f64),
    #[error("Markov weights must be positive with {expected} entries")]
    BadWeights { expected: usize },
}

pub type Result<T> = std::result::Result<T, ChainError>;

/// Non-negative pure state on `L` sites of dimension `d`.
#[derive(Debug, Clone)]
pub struct ChainState {
    ket: Ket,
    d: usize,
}

impl ChainState {
    pub fn new(ket: Ket) -> Result<Self> {
        if !ket.is_nonneg() {
            return Err(ChainError::NotNonneg);
        }
        let d = ket.dims()[0];
        if ket.dims().iter().any(|&x| x != d) {
            return Err(ChainError::NonUniform);
        }
        Ok(Self { ket, d })
    }

    pub fn ket(&self) -> &Ket {
        &self.ket
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.ket.dims().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Born distribution `|Ψ(σ)|²`.
    pub fn distribution(&self) -> ClassicalDistribution {
        ClassicalDistribution {
            layout: self.ket.layout().clone(),
            probs: self.ket.amplitudes().iter().map(|z| z.norm_sqr()).collect(),
        }
    }
}

/// Dense probability table over a site layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalDistribution {
    layout: SiteLayout,
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(layout: SiteLayout, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != layout.total() {
            return Err(StateError::LengthMismatch { expected: layout.total(), found: probs.len() }.into());
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| p < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(ChainError::BadDistribution(total));
        }
        Ok(Self { layout, probs })
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.layout.n_sites()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Marginal over 1-based sites `range` (inclusive), indexed big-endian.
    pub fn window(&self, first: usize, last: usize) -> Vec<f64> {
        if first > last {
            return vec![1.0];
        }
        let sites: Vec<usize> = (first - 1..last).collect();
        self.marginal(&sites)
    }

    /// Marginal over 0-based `sites`.
    pub fn marginal(&self, sites: &[usize]) -> Vec<f64> {
        let rest = self.layout.complement(sites);
        let mut out = vec![0.0; self.layout.dim_of(sites)];
        for (p, (r, _)) in self.probs.iter().zip(self.layout.split_indices(sites, &rest)) {
            out[r] += p;
        }
        out
    }

    /// Shannon entropy (nats) of the marginal on 0-based `sites`.
    pub fn entropy_of(&self, sites: &[usize]) -> f64 {
        if sites.is_empty() {
            return 0.0;
        }
        shannon(&self.marginal(sites))
    }

    /// `‖self − other‖₁`.
    pub fn l1_distance(&self, other: &ClassicalDistribution) -> f64 {
        self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum()
    }
}

fn shannon(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.ln()).sum()
}

/// Defect across one cut.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutDefect {
    /// `A = 1..=i`.
    pub i: usize,
    /// `B = first..=L`.
    pub first: usize,
    pub defect: f64,
}

/// `‖ρ_AB − ρ_A⊗ρ_B‖₁` for every prefix `A = 1..i`, suffix `B = i+gap+1..L`.
pub fn correlation_defect_profile(chain: &ChainState, gap: usize) -> Result<Vec<CutDefect>> {
    let l = chain.len();
    if l < 3 {
        return Err(ChainError::TooShort(3));
    }
    if gap == 0 || gap >= l - 1 {
        return Err(ChainError::BadGap { gap, l });
    }
    (1..l - gap)
        .into_par_iter()
        .map(|i| {
            let a: Vec<usize> = (0..i).collect();
            let b: Vec<usize> = (i + gap..l).collect();
            Ok(CutDefect { i, first: i + gap + 1, defect: factorization_defect(chain.ket(), &a, &b)? })
        })
        .collect()
}

/// Largest defect over all pairs of disjoint regions with no adjacent sites between them.
pub fn exhaustive_correlation_defect(chain: &ChainState) -> Result<f64> {
    let l = chain.len();
    if l > 8 {
        return Err(ChainError::BadRange { i: 0, j: 0, l });
    }
    let total = 3usize.pow(l as u32);
    let defects: Vec<f64> = (0..total)
        .into_par_iter()
        .map(|code| {
            let mut labels = vec![0u8; l];
            let mut c = code;
            for x in labels.iter_mut() {
                *x = (c % 3) as u8;
                c /= 3;
            }
            let a: Vec<usize> = (0..l).filter(|&s| labels[s] == 1).collect();
            let b: Vec<usize> = (0..l).filter(|&s| labels[s] == 2).collect();
            let touching = (0..l - 1).any(|s| labels[s] * labels[s + 1] == 2);
            if a.is_empty() || b.is_empty() || touching || a[0] > b[0] {
                return Ok(0.0);
            }
            factorization_defect(chain.ket(), &a, &b)
        })
        .collect::<std::result::Result<_, _>>()?;
    Ok(defects.into_iter().fold(0.0, f64::max))
}

fn check_range(l: usize, i: usize, j: usize) -> Result<()> {
    if i < 1 || i + 1 >= j || j > l {
        return Err(ChainError::BadRange { i, j, l });
    }
    Ok(())
}

/// `Σ P(outcome) S(ρ_{1..i} | outcome)` after measuring sites `i+1..j−1` (nats).
pub fn measured_window_entanglement(chain: &ChainState, i: usize, j: usize) -> Result<f64> {
    check_range(chain.len(), i, j)?;
    let window: Vec<usize> = (i..j - 1).collect();
    let ens = measure_region(chain.ket(), &window)?;
    let left = ens.local_sites(&(0..i).collect::<Vec<_>>())?;
    Ok(ens.average(|k| von_neumann_entropy(&partial_trace(k, &left)?))?)
}

/// `I((1..i)_c ; j_c | (i+1..j−1)_c)` in nats.
pub fn conditional_mutual_information(p: &ClassicalDistribution, i: usize, j: usize) -> Result<f64> {
    if i < 1 || i >= j || j > p.len() {
        return Err(ChainError::BadRange { i, j, l: p.len() });
    }
    let w: Vec<usize> = (i..j - 1).collect();
    let aw: Vec<usize> = (0..j - 1).collect();
    let wj: Vec<usize> = (i..j).collect();
    let awj: Vec<usize> = (0..j).collect();
    Ok(p.entropy_of(&aw) + p.entropy_of(&wj) - p.entropy_of(&w) - p.entropy_of(&awj))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PinskerGap {
    /// `‖P(σ₁..σ_j) − P(σ₁..σ_{j−1}) P(σ_{i+1}..σ_j) / P(σ_{i+1}..σ_{j−1})‖₁`.
    pub distance: f64,
    pub cmi: f64,
    /// `√(2 · CMI)`.
    pub bound: f64,
}

impl PinskerGap {
    pub fn holds(&self) -> bool {
        self.distance <= self.bound + 1e-9
    }

    /// The same bound written with base-2 logarithms: `‖·‖₁ ≤ √(2 ln 2 · CMI_bits)`.
    pub fn cmi_bits(&self) -> f64 {
        self.cmi / std::f64::consts::LN_2
    }
}

/// Distance from the Markov approximation and its Pinsker bound.
pub fn pinsker_gap(p: &ClassicalDistribution, i: usize, j: usize) -> Result<PinskerGap> {
    let cmi = conditional_mutual_information(p, i, j)?;
    let d = p.layout().dims();
    let joint = p.window(1, j);
    let head = p.window(1, j - 1);
    let tail = p.window(i + 1, j);
    let mid = p.window(i + 1, j - 1);
    let d_j = d[j - 1];
    let d_mid: usize = d[i..j - 1].iter().product();
    let mut distance = 0.0;
    for (idx, &pj) in joint.iter().enumerate() {
        let sj = idx % d_j;
        let hidx = idx / d_j;
        let w = hidx % d_mid;
        let denom = mid[w];
        if denom <= 0.0 {
            continue;
        }
        let q = head[hidx] * tail[w * d_j + sj] / denom;
        distance += (pj - q).abs();
    }
    Ok(PinskerGap { distance, cmi, bound: (2.0 * cmi.max(0.0)).sqrt() })
}

/// Coherent Gibbs state rebuilt from the `(l+1)`-site marginals of `p`.
pub fn gibbs_reconstruct(p: &ClassicalDistribution, window: usize) -> Result<Ket> {
    let l = p.len();
    if window < 1 || window >= l {
        return Err(ChainError::BadWindow { window, l });
    }
    let layout = p.layout().clone();
    let num: Vec<Vec<f64>> = (1..=l - window).map(|i| p.window(i, i + window)).collect();
    let den: Vec<Vec<f64>> = (2..=l - window).map(|i| p.window(i, i + window - 1)).collect();
    let dims = layout.dims().to_vec();
    let sub_index = |digits: &[usize], first: usize, len: usize| {
        digits[first..first + len].iter().zip(&dims[first..first + len]).fold(0, |acc, (&x, &d)| acc * d + x)
    };
    let amps: Vec<f64> = (0..layout.total())
        .into_par_iter()
        .map(|idx| {
            let digits = layout.digits(idx);
            let mut value = 1.0;
            for (k, table) in num.iter().enumerate() {
                value *= table[sub_index(&digits, k, window + 1)];
            }
            for (k, table) in den.iter().enumerate() {
                let q = table[sub_index(&digits, k + 1, window)];
                if q <= 0.0 {
                    return 0.0;
                }
                value /= q;
            }
            value.max(0.0).sqrt()
        })
        .collect();
    Ok(Ket::from_real_normalized(layout, amps)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OverlapReport {
    pub window: usize,
    /// `⟨Ψ|Ψ_Gibbs⟩`.
    pub overlap: f64,
    /// `1 − ½‖P − P_rec‖₁`.
    pub fidelity_lower_bound: f64,
}

impl OverlapReport {
    pub fn holds(&self) -> bool {
        self.overlap >= self.fidelity_lower_bound - 1e-9
    }
}

/// Overlap of the chain with its window-`l` coherent Gibbs reconstruction.
pub fn reconstruction_overlap(chain: &ChainState, window: usize) -> Result<OverlapReport> {
    let p = chain.distribution();
    let rec = gibbs_reconstruct(&p, window)?;
    let overlap = chain.ket().inner(&rec)?.re;
    let q = ChainState::new(rec)?.distribution();
    Ok(OverlapReport { window, overlap, fidelity_lower_bound: 1.0 - 0.5 * p.l1_distance(&q) })
}

/// Transition weights for [`markov_coherent_gibbs`].
#[derive(Debug, Clone, PartialEq)]
pub enum MarkovWeights {
    Uniform,
    /// Independent uniform draws in `[0.05, 1)` from the given seed.
    Random {
        seed: u64,
    },
    /// `initial` has `d^order` entries, `transition` has `d^(order+1)`
    /// (row = history, column = next symbol); rows are normalized.
    Explicit {
        initial: Vec<f64>,
        transition: Vec<f64>,
    },
}

/// `√P` for an order-`order` Markov distribution on `L` sites.
pub fn markov_coherent_gibbs(d: usize, l: usize, order: usize, weights: &MarkovWeights) -> Result<ChainState> {
    if order < 1 || order >= l {
        return Err(ChainError::BadWindow { window: order, l });
    }
    let layout = SiteLayout::uniform(d, l)?;
    let hist = d.pow(order as u32);
    let (initial, transition) = match weights {
        MarkovWeights::Uniform => (vec![1.0; hist], vec![1.0; hist * d]),
        MarkovWeights::Random { seed } => {
            let mut r = rng::stream(*seed, 0);
            let init = (0..hist).map(|_| r.random_range(0.05..1.0)).collect();
            let tr = (0..hist * d).map(|_| r.random_range(0.05..1.0)).collect();
            (init, tr)
        }
        MarkovWeights::Explicit { initial, transition } => (initial.clone(), transition.clone()),
    };
    if initial.len() != hist || initial.iter().any(|&x| x <= 0.0) {
        return Err(ChainError::BadWeights { expected: hist });
    }
    if transition.len() != hist * d || transition.iter().any(|&x| x <= 0.0) {
        return Err(ChainError::BadWeights { expected: hist * d });
    }
    let z0: f64 = initial.iter().sum();
    let mut tr = transition;
    for row in tr.chunks_mut(d) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    let mut amps = vec![0.0; layout.total()];
    for (idx, a) in amps.iter_mut().enumerate() {
        let digits = layout.digits(idx);
        let mut h = digits[..order].iter().fold(0, |acc, &x| acc * d + x);
        let mut p = initial[h] / z0;
        for &x in &digits[order..] {
            p *= tr[h * d + x];
            h = (h * d + x) % hist;
        }
        *a = p.sqrt();
    }
    ChainState::new(Ket::from_real_normalized(layout, amps)?)
}

/// One row of the decay table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub i: usize,
    pub j: usize,
    /// Expected entanglement after measuring `i+1..j−1`, nats.
    pub expected_entanglement: f64,
    pub cmi: f64,
    pub pinsker_distance: f64,
    pub pinsker_bound: f64,
}

/// Least-squares fit `E ≈ A · c^(j−i−1)` in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    pub amplitude: f64,
    pub c_fit: f64,
    /// RMS residual of `ln E`.
    pub rms_log_residual: f64,
    pub points: usize,
}

/// Fits rows with entanglement above 1e-12; needs two distinct separations.
pub fn fit_decay(rows: &[DecayRow]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.expected_entanglement > 1e-12)
        .map(|r| ((r.j - r.i - 1) as f64, r.expected_entanglement.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if pts.len() < 2 || sxx <= 0.0 {
        return None;
    }
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    let icpt = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Some(DecayFit { amplitude: icpt.exp(), c_fit: slope.exp(), rms_log_residual: rms, points: pts.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub l: usize,
    pub d: usize,
    pub correlation_defects: Vec<CutDefect>,
    pub max_correlation_defect: f64,
    pub decay: Vec<DecayRow>,
    pub fit: Option<DecayFit>,
    pub overlaps: Vec<OverlapReport>,
    /// `1 − (L/√2) √(c_fit^l ln d)` for each window `l`, shown next to the overlap.
    pub displayed_overlap_bound: Vec<Option<f64>>,
}

/// Full analysis: correlation defects, decay table, fit and reconstruction overlaps for windows `1..=max_window`.
pub fn analyze_chain(chain: &ChainState, max_window: usize) -> Result<ChainReport> {
    let l = chain.len();
    let defects = correlation_defect_profile(chain, 1)?;
    let p = chain.distribution();
    let pairs: Vec<(usize, usize)> = (1..=l).flat_map(|i| (i + 2..=l).map(move |j| (i, j))).collect();
    let decay: Vec<DecayRow> = pairs
        .into_par_iter()
        .map(|(i, j)| {
            let e = measured_window_entanglement(chain, i, j)?;
            let g = pinsker_gap(&p, i, j)?;
            Ok(DecayRow {
                i,
                j,
                expected_entanglement: e,
                cmi: g.cmi,
                pinsker_distance: g.distance,
                pinsker_bound: g.bound,
            })
        })
        .collect::<Result<_>>()?;
    let fit = fit_decay(&decay);
    let windows = 1..=max_window.min(l - 1);
    let overlaps = windows.clone().map(|w| reconstruction_overlap(chain, w)).collect::<Result<Vec<_>>>()?;
    let displayed = windows
        .map(|w| {
            fit.map(|f| 1.0 - (l as f64 / 2f64.sqrt()) * (f.c_fit.powi(w as i32) * (chain.d() as f64).ln()).sqrt())
        })
        .collect();
    Ok(ChainReport {
        l,
        d: chain.d(),
        max_correlation_defect: defects.iter().map(|c| c.defect).fold(0.0, f64::max),
        correlation_defects: defects,
        decay,
        fit,
        overlaps,
        displayed_overlap_bound: displayed,
    })
}

/// `S(A) + S(B) − S(AB)` for 1-based site sets of the chain.
pub fn quantum_mutual_information(chain: &ChainState, a: &[usize], b: &[usize]) -> Result<f64> {
    let a0: Vec<usize> = a.iter().map(|s| s - 1).collect();
    let b0: Vec<usize> = b.iter().map(|s| s - 1).collect();
    let ab: Vec<usize> = a0.iter().chain(&b0).copied().collect();
    let s = |x: &[usize]| -> Result<f64> { Ok(von_neumann_entropy(&partial_trace(chain.ket(), x)?)?) };
    Ok(s(&a0)? + s(&b0)? - s(&ab)?)
}

/// Classical mutual information of the Born distribution between 1-based site sets.
pub fn classical_mutual_information(p: &ClassicalDistribution, a: &[usize], b: &[usize]) -> f64 {
    let a0: Vec<usize> = a.iter().map(|s| s - 1).collect();
    let b0: Vec<usize> = b.iter().map(|s| s - 1).collect();
    let mut ab: Vec<usize> = a0.iter().chain(&b0).copied().collect();
    ab.sort_unstable();
    p.entropy_of(&a0) + p.entropy_of(&b0) - p.entropy_of(&ab)
}
