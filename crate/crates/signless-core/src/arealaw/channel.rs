use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::ExpanderModel;

/// Channel on `d×d` matrices acting on row-major `vec(ρ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    d: usize,
    mat: DMatrix<f64>,
}

impl Superoperator {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn apply(&self, rho: &DMatrix<f64>) -> DMatrix<f64> {
        let d = self.d;
        let v = nalgebra::DVector::from_fn(d * d, |i, _| rho[(i / d, i % d)]);
        let out = &self.mat * v;
        DMatrix::from_fn(d, d, |i, j| out[i * d + j])
    }

    /// `max_j |Σ_a S[(a,a),j] − vec(I)_j|`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.d;
        (0..d * d)
            .map(|col| {
                let t: f64 = (0..d).map(|a| self.mat[(a * d + a, col)]).sum();
                let want = if col / d == col % d { 1.0 } else { 0.0 };
                (t - want).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|)`.
    pub fn choi(&self) -> DMatrix<f64> {
        let d = self.d;
        DMatrix::from_fn(d * d, d * d, |r, c| {
            let (i, a) = (r / d, r % d);
            let (j, b) = (c / d, c % d);
            self.mat[(a * d + b, i * d + j)]
        })
    }

    pub fn choi_min_eigenvalue(&self) -> f64 {
        let c = self.choi();
        let sym = (&c + c.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `ρ → (1/k) Σ_a P_a ρ P_aᵀ`, or with `pinned` the mixture
/// `q(1/k)Σ_a P_a ρ P_aᵀ + (1−q)(ΠρΠ + (1−Π)ρ(1−Π))`.
pub fn build_channel(model: &ExpanderModel, pinned: bool) -> Superoperator {
    let d = model.d();
    let k = model.k() as f64;
    let w = if pinned { model.q() / k } else { 1.0 / k };
    let mut mat = DMatrix::zeros(d * d, d * d);
    for p in model.perms() {
        for x in 0..d {
            for y in 0..d {
                mat[(p[x] * d + p[y], x * d + y)] += w;
            }
        }
    }
    if pinned {
        for x in 0..d {
            for y in 0..d {
                if model.in_pi(x) == model.in_pi(y) {
                    mat[(x * d + y, x * d + y)] += 1.0 - model.q();
                }
            }
        }
    }
    Superoperator { d, mat }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSpectrum {
    /// Eigenvalues within 1e-8 of 1.
    pub fixed_point_multiplicity: usize,
    /// Largest modulus among the remaining eigenvalues (0 if none).
    pub second_modulus: f64,
    /// All eigenvalue moduli, descending.
    pub moduli: Vec<f64>,
}

/// Eigenvalue-1 multiplicity and the modulus of the next eigenvalue.
pub fn channel_spectrum(s: &Superoperator) -> ChannelSpectrum {
    let m = s.matrix();
    let symmetric = (m - m.transpose()).amax() < 1e-14;
    let (mut moduli, ones): (Vec<f64>, usize) = if symmetric {
        let ev = SymmetricEigen::new(m.clone()).eigenvalues;
        let ones = ev.iter().filter(|&&l| (l - 1.0).abs() < 1e-8).count();
        let rest = ev.iter().filter(|&&l| (l - 1.0).abs() >= 1e-8).map(|l| l.abs()).collect();
        (rest, ones)
    } else {
        let ev = m.complex_eigenvalues();
        let ones = ev.iter().filter(|l| (*l - nalgebra::Complex::new(1.0, 0.0)).norm() < 1e-8).count();
        let rest =
            ev.iter().filter(|l| (*l - nalgebra::Complex::new(1.0, 0.0)).norm() >= 1e-8).map(|l| l.norm()).collect();
        (rest, ones)
    };
    moduli.sort_by(|a, b| b.total_cmp(a));
    let second = moduli.first().copied().unwrap_or(0.0);
    let mut all = vec![1.0; ones];
    all.extend(moduli);
    ChannelSpectrum { fixed_point_multiplicity: ones, second_modulus: second, moduli: all }
}
