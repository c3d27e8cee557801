use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use super::{normalize_sites, Ket, Result, SiteLayout, StateError, NORM_TOL};
use crate::scalar::Real;

/// Dense Hermitian positive semidefinite operator on a set of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    layout: SiteLayout,
    mat: DMatrix<Complex<T>>,
    nonneg: bool,
    trace: T,
}

impl<T: Real> DensityMatrix<T> {
    /// Unit-trace Hermitian matrix.
    pub fn new(layout: SiteLayout, mat: DMatrix<Complex<T>>) -> Result<Self> {
        let rho = Self::unnormalized(layout, mat)?;
        if (rho.trace - T::one()).abs() > T::tol(NORM_TOL) {
            return Err(StateError::BadTrace { trace: rho.trace.to_f64_lossy() });
        }
        Ok(rho)
    }

    /// Hermitian matrix with arbitrary trace, recorded in [`Self::trace`].
    pub fn unnormalized(layout: SiteLayout, mat: DMatrix<Complex<T>>) -> Result<Self> {
        let n = layout.total();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(StateError::LengthMismatch { expected: n * n, found: mat.len() });
        }
        let residual = hermitian_residual(&mat);
        let scale = T::one().max(mat.iter().fold(T::zero(), |m, z| m.max(z.norm1())));
        if residual > T::tol(NORM_TOL) * scale {
            return Err(StateError::NotHermitian { residual: residual.to_f64_lossy() });
        }
        Ok(Self::from_parts(layout, mat))
    }

    pub(crate) fn from_parts(layout: SiteLayout, mat: DMatrix<Complex<T>>) -> Self {
        let eps = T::tol(1e-12);
        let nonneg = mat.iter().all(|z| z.im.abs() <= eps && z.re >= -eps);
        let trace = mat.diagonal().iter().fold(T::zero(), |s, z| s + z.re);
        Self { layout, mat, nonneg, trace }
    }

    /// Real symmetric input.
    pub fn from_real(layout: SiteLayout, mat: DMatrix<T>) -> Result<Self> {
        Self::new(layout, mat.map(|x| Complex::new(x, T::zero())))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn from_ket(ket: &Ket<T>) -> Self {
        let a = ket.amplitudes();
        Self::from_parts(ket.layout().clone(), a * a.adjoint())
    }

    /// Diagonal density matrix on a single site.
    pub fn diagonal(probs: &[T]) -> Result<Self> {
        let layout = SiteLayout::new(vec![probs.len()])?;
        let d = DVector::from_iterator(probs.len(), probs.iter().map(|&p| Complex::new(p, T::zero())));
        Self::new(layout, DMatrix::from_diagonal(&d))
    }

    /// Maximally mixed state on `layout`.
    pub fn maximally_mixed(layout: SiteLayout) -> Self {
        let n = layout.total();
        let v = T::one() / T::from_usize(n).unwrap();
        Self::from_parts(layout, DMatrix::from_diagonal_element(n, n, Complex::new(v, T::zero())))
    }

    pub fn layout(&self) -> &SiteLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> T {
        self.trace
    }

    pub fn is_entrywise_nonneg(&self) -> bool {
        self.nonneg
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<T> {
        let mut ev: Vec<T> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    /// Eigenpairs sorted by descending eigenvalue; eigenvectors are columns.
    pub fn eigen(&self) -> (Vec<T>, DMatrix<Complex<T>>) {
        let e = self.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..e.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| e.eigenvalues[b].partial_cmp(&e.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal));
        let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(self.dim(), self.dim(), |r, col| e.eigenvectors[(r, order[col])]);
        (vals, vecs)
    }

    /// Errors when an eigenvalue falls below `-1e-10`.
    pub fn check_psd(&self) -> Result<()> {
        let min = self.eigenvalues().last().copied().unwrap_or_else(T::zero);
        if min < -T::tol(1e-10) {
            return Err(StateError::NotPsd { min_eig: min.to_f64_lossy() });
        }
        Ok(())
    }

    /// Reduced operator on `keep` (sites of this matrix's layout, kept in the order given).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix<T>> {
        let n = self.layout.n_sites();
        let keep = normalize_sites(keep, n)?;
        let rest = self.layout.complement(&keep);
        let dk = self.layout.dim_of(&keep);
        let dr = self.layout.dim_of(&rest);
        let mut index = vec![0usize; dk * dr];
        for (i, (a, r)) in self.layout.split_indices(&keep, &rest).into_iter().enumerate() {
            index[a * dr + r] = i;
        }
        let mut out = DMatrix::zeros(dk, dk);
        for a in 0..dk {
            for b in 0..dk {
                let mut s = Complex::new(T::zero(), T::zero());
                for r in 0..dr {
                    s += self.mat[(index[a * dr + r], index[b * dr + r])];
                }
                out[(a, b)] = s;
            }
        }
        Ok(Self::from_parts(self.layout.subset(&keep)?, out))
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
        let mut dims = self.layout.dims().to_vec();
        dims.extend_from_slice(other.layout.dims());
        Ok(Self::from_parts(SiteLayout::new(dims)?, self.mat.kronecker(&other.mat)))
    }

    /// Trace norm `‖self − other‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix<T>) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(StateError::LayoutMismatch);
        }
        Ok(trace_norm(&(&self.mat - &other.mat)))
    }
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub(crate) fn trace_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.clone().symmetric_eigenvalues().iter().fold(T::zero(), |s, x| s + x.abs())
}

fn hermitian_residual<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    let mut r = T::zero();
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            r = r.max((m[(i, j)] - m[(j, i)].conj()).norm1());
        }
    }
    r
}

/// Entrywise 1-norm.
pub trait OneNorm<T: Real> {
    fn one_norm(&self) -> T;
}

impl<T: Real> OneNorm<T> for Ket<T> {
    fn one_norm(&self) -> T {
        self.amplitudes().iter().fold(T::zero(), |s, z| s + z.modulus())
    }
}

impl<T: Real> OneNorm<T> for DensityMatrix<T> {
    fn one_norm(&self) -> T {
        self.mat.iter().fold(T::zero(), |s, z| s + z.modulus())
    }
}

impl<T: Real> OneNorm<T> for [T] {
    fn one_norm(&self) -> T {
        self.iter().fold(T::zero(), |s, x| s + x.abs())
    }
}

impl<T: Real> OneNorm<T> for DMatrix<Complex<T>> {
    fn one_norm(&self) -> T {
        self.iter().fold(T::zero(), |s, z| s + z.modulus())
    }
}
