use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar usable by the dense-state machinery (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {
    /// Converts an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("representable literal")
    }

    /// Widens to `f64`.
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance `x`, floored at a few hundred ulps of the type.
    fn tol(x: f64) -> Self {
        let floor = 256.0 * Self::default_epsilon().to_f64_lossy();
        Self::lit(x.max(floor))
    }

    /// Zero-eigenvalue cutoff used for entropies and ranks.
    fn cutoff() -> Self {
        Self::tol(crate::qstate::EIGEN_CUTOFF)
    }
}

impl<T> Real for T where T: RealField + Copy + FromPrimitive + ToPrimitive + Send + Sync + 'static {}

pub(crate) fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}
