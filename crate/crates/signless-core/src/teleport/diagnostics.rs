use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::Serialize;

use super::{
    analyze, construct_qubit_teleport_state, post_measurement_vectors, symmetrize_over_permutations, verify_residual,
    Result, TripartiteSplit, VectorPair, FAC_TOL,
};
use crate::feasibility::{closed_form_witness, FeasibilityQuery};
use crate::qstate::{factorization_defect, measure_region, partial_trace};
use crate::rng::{self, Rng};
use crate::{DensityMatrix, Ket, SiteLayout};

type CMat = DMatrix<Complex<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneBigDiagnostics {
    pub lambda2_a: f64,
    pub lambda2_c: f64,
    /// `Σ_j P_j P_small(j)`.
    pub p_small: f64,
    pub bound_small: f64,
    /// `Σ_j P_j P_small,small(j)`.
    pub p_small_small: f64,
    pub bound_small_small: f64,
    pub factorization_defect: f64,
    /// Bounds are only claimed when `ρ_AC` factorizes.
    pub applicable: bool,
}

impl OneBigDiagnostics {
    pub fn small_ok(&self) -> Option<bool> {
        self.applicable.then_some(self.p_small <= self.bound_small + 1e-9)
    }

    pub fn small_small_ok(&self) -> Option<bool> {
        self.applicable.then_some(self.p_small_small <= self.bound_small_small + 1e-9)
    }
}

/// Probabilities that `A` or `C` leave their dominant eigenvector after measuring `B`.
pub fn one_big_diagnostics(state: &Ket, split: &TripartiteSplit) -> Result<OneBigDiagnostics> {
    split.check(state.layout())?;
    let (d_a, _, d_c) = split.dims(state.layout());
    let rho_a = partial_trace(state, &split.a)?;
    let rho_c = partial_trace(state, &split.c)?;
    let (ea, va) = rho_a.eigen();
    let (ec, vc) = rho_c.eigen();
    let small = |vecs: &CMat| -> CMat {
        let n = vecs.nrows();
        let top = vecs.column(0);
        CMat::identity(n, n) - top * top.adjoint()
    };
    let (sa, sc) = (small(&va), small(&vc));
    let (ia, ic) = (CMat::identity(d_a, d_a), CMat::identity(d_c, d_c));
    let big_a = &ia - &sa;
    let big_c = &ic - &sc;
    let ens = measure_region(state, &split.b)?;
    let la = ens.local_sites(&split.a)?;
    let lc = ens.local_sites(&split.c)?;
    let expect = |psi: &CMat, x: &CMat, y: &CMat| (psi.adjoint() * x * psi * y.transpose()).trace().re;
    let (mut p_small, mut p_ss) = (0.0, 0.0);
    for o in &ens.outcomes {
        let psi = o.state.as_matrix(&la, &lc)?;
        let ps = expect(&psi, &sa, &big_c) + expect(&psi, &big_a, &sc);
        p_small += o.probability * ps;
        p_ss += o.probability * expect(&psi, &sa, &sc);
    }
    let l2 = |e: &[f64]| e.get(1).copied().unwrap_or(0.0).max(0.0);
    let (l2a, l2c) = (l2(&ea), l2(&ec));
    let defect = factorization_defect(state, &split.a, &split.c)?;
    Ok(OneBigDiagnostics {
        lambda2_a: l2a,
        lambda2_c: l2c,
        p_small,
        bound_small: (d_a - 1) as f64 * l2a + (d_c - 1) as f64 * l2c,
        p_small_small: p_ss,
        bound_small_small: ((d_a - 1) * (d_c - 1)) as f64 * l2a * l2c,
        factorization_defect: defect,
        applicable: defect < FAC_TOL,
    })
}

/// How a scan sample was generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleFamily {
    /// `|N(0,1)|` amplitudes, symmetrized, kept only if the uniform-vector test passes.
    RandomSeed,
    /// `φ(i,j,k) = α_i(j) g_j(k)` with every `g_j` a permutation of one random vector.
    CommonDirection,
    /// Qubit construction with random `ρ_A` and the closed-form feasible pair.
    QubitPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanOptions {
    pub samples: usize,
    pub d_a: usize,
    pub d_b: usize,
    pub d_c: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub family: SampleFamily,
    pub dims: (usize, usize, usize),
    pub factorization_defect: f64,
    pub find_residual: f64,
    pub s_a: f64,
    pub s_c: f64,
    pub avg_post_entropy: f64,
    pub ratio: Option<f64>,
}

impl SampleRecord {
    /// Both entropies above 0.01 nats, so the strict bound is claimed.
    pub fn in_scope(&self) -> bool {
        self.s_a > 0.01 && self.s_c > 0.01
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub seed: u64,
    pub dims: (usize, usize, usize),
    pub samples: usize,
    pub retained: usize,
    pub rejected: usize,
    /// Largest ratio among in-scope samples.
    pub max_ratio: Option<f64>,
    pub argmax: Option<SampleRecord>,
    pub max_find_residual: f64,
    /// In-scope samples with ratio ≥ 1 − 1e-6.
    pub violations: usize,
    pub records: Vec<SampleRecord>,
}

/// Samples non-negative states with factorizing `ρ_AC` and records the entropy ratio.
pub fn strict_decrease_scan(opts: &ScanOptions) -> Result<ScanReport> {
    let results: Vec<Result<Option<SampleRecord>>> =
        (0..opts.samples).into_par_iter().map(|i| sample(opts, i)).collect();
    let mut records = Vec::new();
    let mut rejected = 0;
    for r in results {
        match r? {
            Some(rec) => records.push(rec),
            None => rejected += 1,
        }
    }
    let mut argmax: Option<SampleRecord> = None;
    for r in records.iter().filter(|r| r.in_scope()) {
        if argmax.as_ref().map_or(true, |a| r.ratio > a.ratio) {
            argmax = Some(r.clone());
        }
    }
    let violations = records.iter().filter(|r| r.in_scope() && r.ratio.unwrap_or(0.0) >= 1.0 - 1e-6).count();
    Ok(ScanReport {
        seed: opts.seed,
        dims: (opts.d_a, opts.d_b, opts.d_c),
        samples: opts.samples,
        retained: records.len(),
        rejected,
        max_ratio: argmax.as_ref().and_then(|a| a.ratio),
        argmax,
        max_find_residual: records.iter().map(|r| r.find_residual).fold(0.0, f64::max),
        violations,
        records,
    })
}

fn family_for(opts: &ScanOptions, i: usize) -> SampleFamily {
    match i % 3 {
        0 => SampleFamily::RandomSeed,
        2 if opts.d_a == 2 && opts.d_c >= 3 => SampleFamily::QubitPair,
        _ => SampleFamily::CommonDirection,
    }
}

fn sample(opts: &ScanOptions, i: usize) -> Result<Option<SampleRecord>> {
    let family = family_for(opts, i);
    let mut rng = rng::stream(opts.seed, i as u64);
    let split = TripartiteSplit::three_site();
    let state = match family {
        SampleFamily::RandomSeed | SampleFamily::CommonDirection => {
            let phi = if family == SampleFamily::RandomSeed {
                let layout = SiteLayout::new(vec![opts.d_a, opts.d_b, opts.d_c])?;
                Ket::from_real_normalized(layout.clone(), rng::abs_normals(&mut rng, layout.total()))?
            } else {
                common_direction_seed(opts, &mut rng)?
            };
            if verify_residual(&phi, &split)? >= FAC_TOL {
                return Ok(None);
            }
            symmetrize_over_permutations(&phi, &split)?.state
        }
        SampleFamily::QubitPair => match qubit_sample(opts.d_c, &mut rng)? {
            Some(k) => k,
            None => return Ok(None),
        },
    };
    let report = analyze(&state, &split)?;
    if report.factorization_defect >= FAC_TOL {
        return Ok(None);
    }
    let pmv = post_measurement_vectors(&state, &split)?;
    let d = state.dims();
    Ok(Some(SampleRecord {
        index: i,
        family,
        dims: (d[0], d[1], d[2]),
        factorization_defect: report.factorization_defect,
        find_residual: pmv.find_residual,
        s_a: report.s_a,
        s_c: report.s_c,
        avg_post_entropy: report.avg_post_entropy,
        ratio: report.ratio,
    }))
}

fn common_direction_seed<R: Rng>(opts: &ScanOptions, rng: &mut R) -> Result<Ket> {
    let (d_a, d_b, d_c) = (opts.d_a, opts.d_b, opts.d_c);
    let g0 = rng::abs_normals(rng, d_c);
    let alpha = rng::abs_normals(rng, d_a * d_b);
    let layout = SiteLayout::new(vec![d_a, d_b, d_c])?;
    let mut amps = vec![0.0; layout.total()];
    for j in 0..d_b {
        let perm = rng::permutation(rng, d_c);
        for i in 0..d_a {
            for k in 0..d_c {
                amps[layout.index(&[i, j, k])] = alpha[i * d_b + j] * g0[perm[k]];
            }
        }
    }
    Ok(Ket::from_real_normalized(layout, amps)?)
}

fn qubit_sample<R: Rng>(d_c: usize, rng: &mut R) -> Result<Option<Ket>> {
    let p_up: f64 = rng.random_range(0.1..0.9);
    for _ in 0..64 {
        let s: f64 = rng.random_range(0.5..1.0);
        let Some(w) = closed_form_witness(FeasibilityQuery { d: d_c, s }) else { continue };
        let off = s * (p_up * (1.0 - p_up)).sqrt();
        let rho = DensityMatrix::from_real(
            SiteLayout::new(vec![2])?,
            DMatrix::from_row_slice(2, 2, &[p_up, off, off, 1.0 - p_up]),
        )?;
        let pair2 = VectorPair { v: w.v, w: w.w };
        let c = construct_qubit_teleport_state(&rho, d_c, None, Some(pair2))?;
        return Ok(Some(c.state));
    }
    Ok(None)
}
