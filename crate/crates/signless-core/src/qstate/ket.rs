use nalgebra::{Complex, DMatrix, DVector};

use super::{normalize_sites, Result, SiteLayout, StateError, NORM_TOL};
use crate::scalar::{c, Real};

/// Dense normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ket<T: Real> {
    layout: SiteLayout,
    amps: DVector<Complex<T>>,
    nonneg: bool,
}

impl<T: Real> Ket<T> {
    /// Wraps amplitudes that must already be normalized.
    pub fn new(layout: SiteLayout, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != layout.total() {
            return Err(StateError::LengthMismatch { expected: layout.total(), found: amps.len() });
        }
        let amps = DVector::from_vec(amps);
        let norm = amps.norm();
        if (norm - T::one()).abs() > T::tol(NORM_TOL) {
            return Err(StateError::NotNormalized { norm: norm.to_f64_lossy() });
        }
        let nonneg = certify_nonneg(&amps);
        Ok(Self { layout, amps, nonneg })
    }

    /// Normalizes `amps` first.
    pub fn normalized(layout: SiteLayout, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != layout.total() {
            return Err(StateError::LengthMismatch { expected: layout.total(), found: amps.len() });
        }
        let mut v = DVector::from_vec(amps);
        let norm = v.norm();
        if norm <= T::zero() {
            return Err(StateError::ZeroNorm);
        }
        v.unscale_mut(norm);
        let nonneg = certify_nonneg(&v);
        Ok(Self { layout, amps: v, nonneg })
    }

    pub fn from_real(layout: SiteLayout, amps: Vec<T>) -> Result<Self> {
        Self::new(layout, amps.into_iter().map(c).collect())
    }

    pub fn from_real_normalized(layout: SiteLayout, amps: Vec<T>) -> Result<Self> {
        Self::normalized(layout, amps.into_iter().map(c).collect())
    }

    /// Computational basis state.
    pub fn basis(layout: SiteLayout, index: usize) -> Self {
        let mut amps = DVector::zeros(layout.total());
        amps[index] = Complex::new(T::one(), T::zero());
        Self { layout, amps, nonneg: true }
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn dims(&self) -> &[usize] {
        self.layout.dims()
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amps
    }

    pub fn amplitude(&self, digits: &[usize]) -> Complex<T> {
        self.amps[self.layout.index(digits)]
    }

    /// True when every amplitude is real and non-negative (to 1e-12).
    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    /// Real parts of the amplitudes.
    pub fn real_parts(&self) -> Vec<T> {
        self.amps.iter().map(|z| z.re).collect()
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &Ket<T>) -> Result<Ket<T>> {
        let mut dims = self.dims().to_vec();
        dims.extend_from_slice(other.dims());
        let layout = SiteLayout::new(dims)?;
        let amps = self.amps.kronecker(&other.amps);
        let nonneg = self.nonneg && other.nonneg;
        Ok(Ket { layout, amps, nonneg })
    }

    /// Amplitudes arranged as a matrix with row index over `rows` and
    /// column index over `cols`; together they must cover every site.
    pub fn as_matrix(&self, rows: &[usize], cols: &[usize]) -> Result<DMatrix<Complex<T>>> {
        let n = self.layout.n_sites();
        let rows = if rows.is_empty() { vec![] } else { normalize_sites(rows, n)? };
        let cols = if cols.is_empty() { vec![] } else { normalize_sites(cols, n)? };
        if rows.iter().any(|s| cols.contains(s)) {
            return Err(StateError::Overlap);
        }
        if rows.len() + cols.len() != n {
            return Err(StateError::LengthMismatch { expected: n, found: rows.len() + cols.len() });
        }
        let mut m = DMatrix::zeros(self.layout.dim_of(&rows), self.layout.dim_of(&cols));
        for (i, (r, col)) in self.layout.split_indices(&rows, &cols).into_iter().enumerate() {
            m[(r, col)] = self.amps[i];
        }
        Ok(m)
    }

    /// Reorders sites; `order[k]` is the old site placed at position `k`.
    pub fn permute_sites(&self, order: &[usize]) -> Result<Ket<T>> {
        let n = self.layout.n_sites();
        let order = normalize_sites(order, n)?;
        if order.len() != n {
            return Err(StateError::LengthMismatch { expected: n, found: order.len() });
        }
        let m = self.as_matrix(&order, &[])?;
        let layout = self.layout.subset(&order)?;
        Ok(Ket { layout, amps: m.column(0).into_owned(), nonneg: self.nonneg })
    }

    /// Inner product `⟨self|other⟩`.
    pub fn inner(&self, other: &Ket<T>) -> Result<Complex<T>> {
        if self.layout != other.layout {
            return Err(StateError::LayoutMismatch);
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Inverse of [`Self::as_matrix`]: reads amplitudes from `m` and normalizes.
    pub fn from_matrix(layout: SiteLayout, rows: &[usize], cols: &[usize], m: &DMatrix<Complex<T>>) -> Result<Self> {
        let n = layout.n_sites();
        if rows.len() + cols.len() != n {
            return Err(StateError::LengthMismatch { expected: n, found: rows.len() + cols.len() });
        }
        let (dr, dc) = (layout.dim_of(rows), layout.dim_of(cols));
        if m.shape() != (dr, dc) {
            return Err(StateError::LengthMismatch { expected: dr * dc, found: m.len() });
        }
        let amps = layout.split_indices(rows, cols).into_iter().map(|(r, c)| m[(r, c)]).collect();
        Self::normalized(layout, amps)
    }

    /// Builds from an already normalized vector without rechecking.
    pub(crate) fn from_parts(layout: SiteLayout, amps: DVector<Complex<T>>) -> Self {
        let nonneg = certify_nonneg(&amps);
        Ket { layout, amps, nonneg }
    }
}

fn certify_nonneg<T: Real>(amps: &DVector<Complex<T>>) -> bool {
    let eps = T::tol(1e-12);
    amps.iter().all(|z| z.im.abs() <= eps && z.re >= -eps)
}
