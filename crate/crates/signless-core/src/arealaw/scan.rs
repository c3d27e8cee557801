use rayon::prelude::*;
use serde::Serialize;

use super::{
    build_base_hamiltonian, build_channel, build_primed_hamiltonian, channel_spectrum, spectrum_report, ExpanderModel,
    Result,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub d_list: Vec<usize>,
    pub k: usize,
    /// Instances per dimension; instance `i` uses seed `seed + i`.
    pub seeds: usize,
    pub seed: u64,
    pub q: f64,
    /// Redraws allowed when the unpinned channel is not expanding.
    pub max_attempts: u64,
    /// Also report the pinned channel.
    pub pinned: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { d_list: vec![4, 8], k: 4, seeds: 10, seed: 1, q: 0.5, max_attempts: 8, pinned: false }
    }
}

/// One model instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub d: usize,
    pub k: usize,
    pub seed: u64,
    pub attempts: u64,
    pub fp_multiplicity: usize,
    pub second_ev: f64,
    pub pinned_fp_multiplicity: Option<usize>,
    pub pinned_second_ev: Option<f64>,
    pub base_ground_energy: f64,
    pub base_degeneracy: usize,
    pub base_gap: Option<f64>,
    pub primed_ground_energy: f64,
    pub primed_degeneracy: usize,
    pub primed_gap: Option<f64>,
    pub end_entropy_over_lnd: f64,
}

impl ScanRow {
    pub fn expanding(&self) -> bool {
        self.fp_multiplicity == 2 && self.second_ev < 1.0 - 1e-3
    }
}

/// Draws an expanding model, redrawing up to `max_attempts` times.
fn draw(d: usize, cfg: &ScanConfig, seed: u64) -> Result<(ExpanderModel, u64)> {
    let mut last = None;
    for attempt in 0..cfg.max_attempts.max(1) {
        let model = ExpanderModel::random(d, cfg.k, cfg.q, seed, attempt)?;
        let s = channel_spectrum(&build_channel(&model, false));
        let ok = s.fixed_point_multiplicity == 2 && s.second_modulus < 1.0 - 1e-3;
        last = Some((model, attempt + 1));
        if ok {
            break;
        }
    }
    Ok(last.expect("at least one attempt"))
}

fn run_one(d: usize, cfg: &ScanConfig, seed: u64) -> Result<ScanRow> {
    let (model, attempts) = draw(d, cfg, seed)?;
    let unpinned = channel_spectrum(&build_channel(&model, false));
    let pinned = cfg.pinned.then(|| channel_spectrum(&build_channel(&model, true)));
    let base = spectrum_report(&build_base_hamiltonian(&model)?)?;
    let primed = spectrum_report(&build_primed_hamiltonian(&model)?)?;
    Ok(ScanRow {
        d,
        k: cfg.k,
        seed,
        attempts,
        fp_multiplicity: unpinned.fixed_point_multiplicity,
        second_ev: unpinned.second_modulus,
        pinned_fp_multiplicity: pinned.as_ref().map(|p| p.fixed_point_multiplicity),
        pinned_second_ev: pinned.as_ref().map(|p| p.second_modulus),
        base_ground_energy: base.ground_energy,
        base_degeneracy: base.ground_degeneracy,
        base_gap: base.spectral_gap,
        primed_ground_energy: primed.ground_energy,
        primed_degeneracy: primed.ground_degeneracy,
        primed_gap: primed.spectral_gap,
        end_entropy_over_lnd: primed.end_site_entropy / (d as f64).ln(),
    })
}

/// One row per `(d, seed)`, ordered by `d` then seed.
pub fn scan_models(cfg: &ScanConfig) -> Result<Vec<ScanRow>> {
    let cells: Vec<(usize, u64)> =
        cfg.d_list.iter().flat_map(|&d| (0..cfg.seeds as u64).map(move |i| (d, i))).collect();
    cells.into_par_iter().map(|(d, i)| run_one(d, cfg, cfg.seed.wrapping_add(i))).collect()
}
