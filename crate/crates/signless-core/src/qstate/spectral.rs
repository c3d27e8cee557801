use super::density::trace_norm;
use super::{normalize_sites, DensityMatrix, Ket, OneNorm, Result, StateError, NORM_TOL};
use crate::scalar::Real;

/// Descending squared Schmidt coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum<T: Real> {
    coefficients: Vec<T>,
}

impl<T: Real> SchmidtSpectrum<T> {
    /// Validates order and unit sum.
    pub fn new(coefficients: Vec<T>) -> Result<Self> {
        check_sorted(&coefficients)?;
        let total = sum(&coefficients);
        if (total - T::one()).abs() > T::tol(NORM_TOL) {
            return Err(StateError::SumMismatch { a: total.to_f64_lossy(), b: 1.0 });
        }
        Ok(Self { coefficients })
    }

    /// Sorts, clamps tiny negatives to zero, then validates.
    pub fn from_unsorted(mut coefficients: Vec<T>) -> Result<Self> {
        for x in coefficients.iter_mut() {
            if *x < T::zero() && *x > -T::tol(1e-10) {
                *x = T::zero();
            }
        }
        coefficients.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Self::new(coefficients)
    }

    /// `1/d` repeated `d` times, padded with zeros to `len`.
    pub fn flat(d: usize, len: usize) -> Self {
        let v = T::one() / T::from_usize(d).unwrap();
        let mut c = vec![v; d];
        c.resize(len.max(d), T::zero());
        Self { coefficients: c }
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> T {
        entropy_of(&self.coefficients)
    }

    /// Coefficients padded with zeros to length `n`.
    pub fn padded(&self, n: usize) -> Vec<T> {
        let mut c = self.coefficients.clone();
        c.resize(n.max(c.len()), T::zero());
        c
    }
}

/// Either kind of state accepted by [`partial_trace`].
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a, T: Real> {
    Ket(&'a Ket<T>),
    Density(&'a DensityMatrix<T>),
}

impl<'a, T: Real> From<&'a Ket<T>> for StateRef<'a, T> {
    fn from(k: &'a Ket<T>) -> Self {
        StateRef::Ket(k)
    }
}

impl<'a, T: Real> From<&'a DensityMatrix<T>> for StateRef<'a, T> {
    fn from(r: &'a DensityMatrix<T>) -> Self {
        StateRef::Density(r)
    }
}

/// Reduced density matrix on `keep`, in the order listed.
pub fn partial_trace<'a, T: Real>(state: impl Into<StateRef<'a, T>>, keep: &[usize]) -> Result<DensityMatrix<T>> {
    match state.into() {
        StateRef::Density(rho) => rho.partial_trace(keep),
        StateRef::Ket(ket) => {
            let keep = normalize_sites(keep, ket.layout().n_sites())?;
            let rest = ket.layout().complement(&keep);
            let m = ket.as_matrix(&keep, &rest)?;
            let rho = &m * m.adjoint();
            Ok(DensityMatrix::from_parts(ket.layout().subset(&keep)?, rho))
        }
    }
}

/// Schmidt spectrum across the cut `side_a | rest`.
pub fn schmidt_spectrum<T: Real>(state: &Ket<T>, side_a: &[usize]) -> Result<SchmidtSpectrum<T>> {
    let n = state.layout().n_sites();
    let side_a = normalize_sites(side_a, n).map_err(|e| match e {
        StateError::EmptySites => StateError::DegenerateCut,
        e => e,
    })?;
    if side_a.len() == n {
        return Err(StateError::DegenerateCut);
    }
    let rest = state.layout().complement(&side_a);
    let m = state.as_matrix(&side_a, &rest)?;
    let sv = m.singular_values();
    let mut c: Vec<T> = sv.iter().map(|s| *s * *s).collect();
    c.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(SchmidtSpectrum { coefficients: c })
}

/// Von Neumann entropy in nats; eigenvalues at or below the cutoff are skipped.
pub fn von_neumann_entropy<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let ev = rho.eigenvalues();
    if let Some(&min) = ev.last() {
        if min < -T::tol(1e-10) {
            return Err(StateError::NotPsd { min_eig: min.to_f64_lossy() });
        }
    }
    Ok(entropy_of(&ev))
}

pub(crate) fn entropy_of<T: Real>(p: &[T]) -> T {
    let cut = T::cutoff();
    p.iter().filter(|&&x| x > cut).fold(T::zero(), |s, &x| s - x * x.ln())
}

/// Prefix-sum majorization `a ≻ b` for descending sequences of equal total.
pub fn majorizes<T: Real>(a: &[T], b: &[T]) -> Result<bool> {
    check_sorted(a)?;
    check_sorted(b)?;
    let (sa, sb) = (sum(a), sum(b));
    if (sa - sb).abs() > T::tol(1e-10) {
        return Err(StateError::SumMismatch { a: sa.to_f64_lossy(), b: sb.to_f64_lossy() });
    }
    let n = a.len().max(b.len());
    let (mut pa, mut pb) = (T::zero(), T::zero());
    let slack = T::tol(1e-12);
    for i in 0..n {
        pa += a.get(i).copied().unwrap_or_else(T::zero);
        pb += b.get(i).copied().unwrap_or_else(T::zero);
        if pa < pb - slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Entrywise 1-norm of a ket, density matrix or vector.
pub fn one_norm<T: Real, X: OneNorm<T> + ?Sized>(x: &X) -> T {
    x.one_norm()
}

/// `‖ρ_AC − ρ_A ⊗ ρ_C‖₁`.
pub fn factorization_defect<T: Real>(state: &Ket<T>, part_a: &[usize], part_c: &[usize]) -> Result<T> {
    let n = state.layout().n_sites();
    let a = normalize_sites(part_a, n)?;
    let c = normalize_sites(part_c, n)?;
    if a.iter().any(|s| c.contains(s)) {
        return Err(StateError::Overlap);
    }
    if a.len() + c.len() == n {
        return Err(StateError::DegenerateCut);
    }
    let mut ac = a.clone();
    ac.extend_from_slice(&c);
    let rho_ac = partial_trace(state, &ac)?;
    let na = a.len();
    let rho_a = rho_ac.partial_trace(&(0..na).collect::<Vec<_>>())?;
    let rho_c = rho_ac.partial_trace(&(na..ac.len()).collect::<Vec<_>>())?;
    let prod = rho_a.tensor(&rho_c)?;
    Ok(trace_norm(&(rho_ac.matrix() - prod.matrix())))
}

fn check_sorted<T: Real>(x: &[T]) -> Result<()> {
    let slack = T::tol(1e-12);
    if x.windows(2).any(|w| w[1] > w[0] + slack) {
        return Err(StateError::Unsorted);
    }
    Ok(())
}

fn sum<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |s, &v| s + v)
}
