use super::{Result, StateError};

/// Default cap on the total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 1 << 22;

/// Ordered list of local dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiteLayout {
    dims: Vec<usize>,
    total: usize,
}

impl SiteLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(StateError::EmptySites);
        }
        let mut total = 1usize;
        for &d in &dims {
            if d == 0 {
                return Err(StateError::ZeroDimension);
            }
            total = total.checked_mul(d).ok_or(StateError::DimensionCap { dim: usize::MAX, cap })?;
        }
        if total > cap {
            return Err(StateError::DimensionCap { dim: total, cap });
        }
        Ok(Self { dims, total })
    }

    /// `n` sites of dimension `d`.
    pub fn uniform(d: usize, n: usize) -> Result<Self> {
        Self::new(vec![d; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Product of the dimensions of `sites`.
    pub fn dim_of(&self, sites: &[usize]) -> usize {
        sites.iter().map(|&s| self.dims[s]).product()
    }

    /// Layout of a subset of sites, in the order given.
    pub fn subset(&self, sites: &[usize]) -> Result<SiteLayout> {
        let sites = normalize_sites(sites, self.n_sites())?;
        SiteLayout::new(sites.iter().map(|&s| self.dims[s]).collect())
    }

    /// Sites not in `sites`, ascending.
    pub fn complement(&self, sites: &[usize]) -> Vec<usize> {
        (0..self.n_sites()).filter(|s| !sites.contains(s)).collect()
    }

    /// Flat index of a digit tuple.
    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// Digit tuple of a flat index.
    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        out
    }

    /// For every flat index, the pair (index over `rows`, index over `cols`),
    /// each composed big-endian in the order the sites are listed.
    pub(crate) fn split_indices(&self, rows: &[usize], cols: &[usize]) -> Vec<(usize, usize)> {
        let n = self.n_sites();
        let mut row_stride = vec![0usize; n];
        let mut col_stride = vec![0usize; n];
        let mut s = 1;
        for &site in rows.iter().rev() {
            row_stride[site] = s;
            s *= self.dims[site];
        }
        s = 1;
        for &site in cols.iter().rev() {
            col_stride[site] = s;
            s *= self.dims[site];
        }
        let mut out = Vec::with_capacity(self.total);
        let mut digits = vec![0usize; n];
        let (mut r, mut c) = (0usize, 0usize);
        for _ in 0..self.total {
            out.push((r, c));
            for site in (0..n).rev() {
                digits[site] += 1;
                r += row_stride[site];
                c += col_stride[site];
                if digits[site] < self.dims[site] {
                    break;
                }
                r -= row_stride[site] * self.dims[site];
                c -= col_stride[site] * self.dims[site];
                digits[site] = 0;
            }
        }
        out
    }
}

/// Checks a site list against `n_sites`: nonempty, in range, no repeats.
/// Order is preserved.
pub fn normalize_sites(sites: &[usize], n_sites: usize) -> Result<Vec<usize>> {
    if sites.is_empty() {
        return Err(StateError::EmptySites);
    }
    let mut seen = vec![false; n_sites];
    for &s in sites {
        if s >= n_sites {
            return Err(StateError::SiteOutOfRange { site: s, n_sites });
        }
        if seen[s] {
            return Err(StateError::DuplicateSite(s));
        }
        seen[s] = true;
    }
    Ok(sites.to_vec())
}
