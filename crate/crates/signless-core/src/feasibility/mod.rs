//! Feasibility of non-negative vector pairs.
//!
//! A pair `(d, s)` is feasible when there are non-negative unit vectors
//! `v, w ∈ R^d` with `⟨v|w⟩ = s` and `2|v|₁|w|₁/(|v|₁²+|w|₁²) ≤ s`.

mod simplex;

pub use simplex::{Minimum, NelderMead};

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::rng::{self, Rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeasibilityError {
    #[error("zero vector")]
    ZeroVector,
    #[error("vectors have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("angle {0} outside [0, pi/2)")]
    AngleOutOfRange(f64),
    #[error("dimension {d} too small (need at least {min})")]
    DimensionTooSmall { d: usize, min: usize },
    #[error("inner product {0} outside [0, 1]")]
    InnerOutOfRange(f64),
}

pub type Result<T> = std::result::Result<T, FeasibilityError>;

/// A query `(d, s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityQuery {
    pub d: usize,
    pub s: f64,
}

impl FeasibilityQuery {
    pub fn new(d: usize, s: f64) -> Result<Self> {
        if d < 1 {
            return Err(FeasibilityError::DimensionTooSmall { d, min: 1 });
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(FeasibilityError::InnerOutOfRange(s));
        }
        Ok(Self { d, s })
    }
}

/// Angles of the two-vector parametrization: `θ`, `φ` are the angles of `v`
/// and `w` from the uniform vector and `δ = θ − φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AppendixAngles {
    pub theta: f64,
    pub phi: f64,
    pub delta: f64,
}

/// How a witness was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WitnessSource {
    ClosedForm,
    Simplex,
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityWitness {
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub lhs: f64,
    pub inner: f64,
    pub angles: Option<AppendixAngles>,
    pub source: WitnessSource,
}

impl FeasibilityWitness {
    /// `lhs − inner`; non-positive for a feasible pair.
    pub fn residual(&self) -> f64 {
        self.lhs - self.inner
    }
}

/// Outcome of [`feasible_pair_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SearchVerdict {
    Feasible(FeasibilityWitness),
    /// Ruled out by the two-dimensional argument (or `d = 1`).
    Infeasible,
    /// Budget exhausted; `best` is the smallest penalized objective seen.
    NotFound {
        evaluations: usize,
        best: f64,
    },
}

impl SearchVerdict {
    pub fn witness(&self) -> Option<&FeasibilityWitness> {
        match self {
            SearchVerdict::Feasible(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.witness().is_some()
    }
}

/// Budget for the general search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchBudget {
    pub restarts: usize,
    pub evaluations_per_restart: usize,
    pub penalty: f64,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { restarts: 50, evaluations_per_restart: 20_000, penalty: 1e3, seed: 0x5eed }
    }
}

/// `2|v|₁|w|₁ / (|v|₁² + |w|₁²)`.
pub fn lhs_ratio(v: &[f64], w: &[f64]) -> Result<f64> {
    if v.len() != w.len() {
        return Err(FeasibilityError::LengthMismatch(v.len(), w.len()));
    }
    let a: f64 = v.iter().map(|x| x.abs()).sum();
    let b: f64 = w.iter().map(|x| x.abs()).sum();
    if a == 0.0 || b == 0.0 {
        return Err(FeasibilityError::ZeroVector);
    }
    Ok(2.0 * a * b / (a * a + b * b))
}

/// Left side for `v = e₁` and `w` rotated by `δ` from `v` towards the uniform vector.
pub fn appendix_lhs(delta: f64, d: usize) -> Result<f64> {
    if !(0.0..FRAC_PI_2).contains(&delta) {
        return Err(FeasibilityError::AngleOutOfRange(delta));
    }
    if d < 2 {
        return Err(FeasibilityError::DimensionTooSmall { d, min: 2 });
    }
    let (s, c) = delta.sin_cos();
    let r = ((d - 1) as f64).sqrt();
    Ok(2.0 * (c + r * s) / (2.0 + (d as f64 - 2.0) * s * s + 2.0 * r * c * s))
}

/// The pair `v = e₁`, `w = cos δ e₁ + sin δ u` with `u` uniform on the other coordinates.
pub fn appendix_pair(delta: f64, d: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if d < 2 {
        return Err(FeasibilityError::DimensionTooSmall { d, min: 2 });
    }
    if !(0.0..=FRAC_PI_2).contains(&delta) {
        return Err(FeasibilityError::AngleOutOfRange(delta));
    }
    let mut v = vec![0.0; d];
    v[0] = 1.0;
    let (s, c) = delta.sin_cos();
    let mut w = vec![s / ((d - 1) as f64).sqrt(); d];
    w[0] = c;
    Ok((v, w))
}

fn witness(v: Vec<f64>, w: Vec<f64>, source: WitnessSource, angles: Option<AppendixAngles>) -> FeasibilityWitness {
    let lhs = lhs_ratio(&v, &w).unwrap_or(f64::NAN);
    let inner = dot(&v, &w);
    FeasibilityWitness { v, w, lhs, inner, angles, source }
}

/// Closed-form attempt: the pair from [`appendix_pair`] at `δ = arccos s`.
pub fn closed_form_witness(q: FeasibilityQuery) -> Option<FeasibilityWitness> {
    if q.d < 2 {
        return None;
    }
    let delta = q.s.clamp(0.0, 1.0).acos();
    let (v, w) = appendix_pair(delta, q.d).ok()?;
    let theta = (1.0 / (q.d as f64).sqrt()).acos();
    let angles = AppendixAngles { theta, phi: theta - delta, delta };
    let wit = witness(v, w, WitnessSource::ClosedForm, Some(angles));
    (wit.lhs <= q.s + 1e-10 && (wit.inner - q.s).abs() <= 1e-6).then_some(wit)
}

/// Two-phase search for a feasible pair.
pub fn feasible_pair_search(q: FeasibilityQuery, budget: &SearchBudget) -> SearchVerdict {
    if q.s >= 1.0 {
        let mut v = vec![0.0; q.d];
        v[0] = 1.0;
        return SearchVerdict::Feasible(witness(v.clone(), v, WitnessSource::Trivial, None));
    }
    if q.d <= 2 {
        return SearchVerdict::Infeasible;
    }
    if let Some(w) = closed_form_witness(q) {
        return SearchVerdict::Feasible(w);
    }
    simplex_search(q, budget)
}

/// General refinement only: penalized simplex descent over `(v, w)`.
pub fn simplex_search(q: FeasibilityQuery, budget: &SearchBudget) -> SearchVerdict {
    let d = q.d;
    let nm = NelderMead { max_evaluations: budget.evaluations_per_restart, ..NelderMead::default() };
    let runs: Vec<(Option<FeasibilityWitness>, Minimum)> = (0..budget.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream_at(budget.seed, &[d as u64, q.s.to_bits(), r as u64]);
            let x0: Vec<f64> = (0..2 * d).map(|_| rng.random::<f64>()).collect();
            let m = nm.minimize(|x| penalized(x, d, q.s, budget.penalty), &x0);
            let found = split(&m.x, d).and_then(|(v, w)| repair(v, w, q.s));
            (found, m)
        })
        .collect();
    let evaluations = runs.iter().map(|(_, m)| m.evaluations).sum();
    let best = runs.iter().map(|(_, m)| m.value).fold(f64::INFINITY, f64::min);
    match runs.into_iter().find_map(|(w, _)| w) {
        Some(w) => SearchVerdict::Feasible(w),
        None => SearchVerdict::NotFound { evaluations, best },
    }
}

fn penalized(x: &[f64], d: usize, s: f64, penalty: f64) -> f64 {
    match split(x, d) {
        Some((v, w)) => {
            let inner = dot(&v, &w);
            let lhs = lhs_ratio(&v, &w).unwrap_or(1.0);
            lhs - inner + penalty * (inner - s).powi(2)
        }
        None => 10.0,
    }
}

/// Clamps to the orthant and normalizes both halves.
fn split(x: &[f64], d: usize) -> Option<(Vec<f64>, Vec<f64>)> {
    let v = unit_clamped(&x[..d])?;
    let w = unit_clamped(&x[d..])?;
    Some((v, w))
}

fn unit_clamped(x: &[f64]) -> Option<Vec<f64>> {
    let c: Vec<f64> = x.iter().map(|&a| a.max(0.0)).collect();
    let n = c.iter().map(|a| a * a).sum::<f64>().sqrt();
    (n > 1e-300).then(|| c.into_iter().map(|a| a / n).collect())
}

/// Moves `w` along `±v` until `⟨v|w⟩ = s`, then checks the inequality.
fn repair(v: Vec<f64>, w: Vec<f64>, s: f64) -> Option<FeasibilityWitness> {
    let inner0 = dot(&v, &w);
    if (inner0 - s).abs() > 1e-2 {
        return None;
    }
    let sign = if inner0 < s { 1.0 } else { -1.0 };
    let moved = |t: f64| -> Option<Vec<f64>> {
        let x: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a + sign * t * b).collect();
        unit_clamped(&x)
    };
    let g = |t: f64| moved(t).map(|x| sign * (dot(&v, &x) - s));
    let mut hi = 1e-3;
    while g(hi).is_some_and(|x| x < 0.0) {
        hi *= 2.0;
        if hi > 1e6 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match g(mid) {
            Some(x) if x < 0.0 => lo = mid,
            _ => hi = mid,
        }
    }
    let w = moved(hi)?;
    let wit = witness(v, w, WitnessSource::Simplex, None);
    ((wit.inner - s).abs() <= 1e-9 && wit.residual() <= 1e-10).then_some(wit)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bisection result for the smallest feasible inner product.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Threshold {
    pub d: usize,
    /// Smallest inner product shown feasible.
    pub s_min: f64,
    /// Largest inner product at which no witness was found.
    pub s_infeasible: f64,
    pub witness: FeasibilityWitness,
    /// True if the simplex search ever succeeded where the closed form failed.
    pub simplex_improved: bool,
    pub bisection_steps: usize,
}

/// Bisection for the feasibility threshold at dimension `d`.
pub fn min_feasible_inner_product(d: usize, precision: f64, budget: &SearchBudget) -> Result<Threshold> {
    if d < 3 {
        return Err(FeasibilityError::DimensionTooSmall { d, min: 3 });
    }
    let mut simplex_improved = false;
    let mut oracle = |s: f64| -> Option<FeasibilityWitness> {
        let q = FeasibilityQuery { d, s };
        if let Some(w) = closed_form_witness(q) {
            return Some(w);
        }
        let w = simplex_search(q, budget).witness().cloned();
        simplex_improved |= w.is_some();
        w
    };
    let mut lo = 2.0 / (d as f64).sqrt() - 0.1;
    if !(0.0..1.0).contains(&lo) || oracle(lo).is_some() {
        lo = 0.0;
    }
    let mut hi = 1.0;
    let mut best = oracle(hi).expect("s = 1 is always feasible");
    let mut steps = 0;
    while hi - lo > precision {
        let mid = 0.5 * (lo + hi);
        match oracle(mid) {
            Some(w) => {
                hi = mid;
                best = w;
            }
            None => lo = mid,
        }
        steps += 1;
    }
    Ok(Threshold { d, s_min: hi, s_infeasible: lo, witness: best, simplex_improved, bisection_steps: steps })
}

/// Grid check of the two-dimensional impossibility argument.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct D2Check {
    pub points: usize,
    /// Smallest margin `(cos δ + sin δ) − (cos δ + cos²δ sin δ)` over `δ > 0`.
    pub min_margin: f64,
    /// Grid points (other than `δ = 0`) where the margin is not positive.
    pub violations: usize,
    pub margin_at_zero: f64,
}

impl D2Check {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.min_margin > 0.0
    }
}

/// Evaluates both sides of the `d = 2` inequality on `points` angles in `[0, π/2)`.
pub fn d2_analytic_check(points: usize) -> D2Check {
    let step = FRAC_PI_2 / points as f64;
    let margin = |delta: f64| {
        let (s, c) = delta.sin_cos();
        // cos δ appears on both sides and is cancelled before subtracting.
        s - c * c * s
    };
    let mut min_margin = f64::INFINITY;
    let mut violations = 0;
    for i in 1..points {
        let m = margin(i as f64 * step);
        min_margin = min_margin.min(m);
        if m <= 0.0 {
            violations += 1;
        }
    }
    D2Check { points, min_margin, violations, margin_at_zero: margin(0.0) }
}

/// Default grid size for [`d2_analytic_check`].
pub const D2_GRID_POINTS: usize = 100_000;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lhs_examples() {
        let t = std::f64::consts::FRAC_PI_4;
        let r = lhs_ratio(&[1.0, 0.0], &[t.cos(), t.sin()]).unwrap();
        assert!((r - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-15);
        assert_eq!(lhs_ratio(&[0.6, 0.8], &[0.6, 0.8]).unwrap(), 1.0);
        assert_eq!(lhs_ratio(&[0.0, 0.0], &[1.0, 0.0]), Err(FeasibilityError::ZeroVector));
    }

    #[test]
    fn appendix_lhs_d2_form() {
        for i in 0..50 {
            let dlt = i as f64 * 0.03;
            let (s, c) = dlt.sin_cos();
            assert!((appendix_lhs(dlt, 2).unwrap() - (c + s) / (1.0 + c * s)).abs() < 1e-14);
        }
        assert_eq!(appendix_lhs(0.0, 7).unwrap(), 1.0);
        assert!(appendix_lhs(FRAC_PI_2, 3).is_err());
    }

    #[test]
    fn d2_grid() {
        let c = d2_analytic_check(D2_GRID_POINTS);
        assert!(c.passed());
        assert_eq!(c.margin_at_zero, 0.0);
    }
}
