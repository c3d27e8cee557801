use super::{normalize_sites, Ket, Result, SiteLayout, StateError, OUTCOME_CUTOFF};
use crate::scalar::Real;

/// One outcome of a computational-basis measurement.
#[derive(Debug, Clone)]
pub struct Outcome<T: Real> {
    /// Flat index over the measured region.
    pub index: usize,
    pub probability: T,
    /// Normalized state on the unmeasured sites (ascending site order).
    pub state: Ket<T>,
}

/// Computational-basis measurement of a region.
#[derive(Debug, Clone)]
pub struct MeasurementEnsemble<T: Real> {
    pub region: Vec<usize>,
    /// Unmeasured sites, ascending; site `remaining[k]` is site `k` of each post-state.
    pub remaining: Vec<usize>,
    pub region_layout: SiteLayout,
    pub outcomes: Vec<Outcome<T>>,
    /// Outcomes dropped for probability below 1e-14.
    pub discarded: usize,
}

impl<T: Real> MeasurementEnsemble<T> {
    pub fn total_probability(&self) -> T {
        self.outcomes.iter().fold(T::zero(), |s, o| s + o.probability)
    }

    /// Position of an original site inside the post-measurement layout.
    pub fn local_site(&self, site: usize) -> Option<usize> {
        self.remaining.iter().position(|&s| s == site)
    }

    /// Maps original site labels to post-measurement positions.
    pub fn local_sites(&self, sites: &[usize]) -> Result<Vec<usize>> {
        sites.iter().map(|&s| self.local_site(s).ok_or(StateError::Overlap)).collect()
    }

    /// Probability-weighted average of `f` over outcomes.
    pub fn average<F>(&self, mut f: F) -> Result<T>
    where
        F: FnMut(&Ket<T>) -> Result<T>,
    {
        let mut s = T::zero();
        for o in &self.outcomes {
            s += o.probability * f(&o.state)?;
        }
        Ok(s)
    }
}

/// Measures `region` in the computational basis.
pub fn measure_region<T: Real>(state: &Ket<T>, region: &[usize]) -> Result<MeasurementEnsemble<T>> {
    let layout = state.layout();
    let mut region = normalize_sites(region, layout.n_sites())?;
    region.sort_unstable();
    if region.len() == layout.n_sites() {
        return Err(StateError::RegionIsEverything);
    }
    let remaining = layout.complement(&region);
    let rem_layout = layout.subset(&remaining)?;
    let m = state.as_matrix(&region, &remaining)?;
    let cutoff = T::lit(OUTCOME_CUTOFF);
    let mut outcomes = Vec::new();
    let mut discarded = 0;
    for j in 0..m.nrows() {
        let row = m.row(j);
        let p = row.norm_squared();
        if p < cutoff {
            discarded += 1;
            continue;
        }
        let v = row.transpose().unscale(p.sqrt());
        outcomes.push(Outcome { index: j, probability: p, state: Ket::from_parts(rem_layout.clone(), v) });
    }
    Ok(MeasurementEnsemble { region_layout: layout.subset(&region)?, region, remaining, outcomes, discarded })
}
