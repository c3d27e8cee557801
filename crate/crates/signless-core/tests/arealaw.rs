use std::f64::consts::FRAC_PI_3;

use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;
use rand::Rng;
use signless_core::arealaw::{
    build_base_hamiltonian, build_channel, build_primed_hamiltonian, channel_spectrum, isometry_reduction_check,
    projector_gap_check, random_projector, scan_models, spectrum_report, spectrum_report_with, ArealawError, Component,
    ExpanderModel, FourSiteHamiltonian, ScanConfig, SolveMethod,
};
use signless_core::rng;

fn model(d: usize, seed: u64) -> ExpanderModel {
    // first expanding draw for this seed
    for attempt in 0..8 {
        let m = ExpanderModel::random(d, 4, 0.5, seed, attempt).unwrap();
        let s = channel_spectrum(&build_channel(&m, false));
        if s.fixed_point_multiplicity == 2 && s.second_modulus < 1.0 - 1e-3 {
            return m;
        }
    }
    panic!("no expanding draw for d={d} seed={seed}");
}

fn perm_matrix(p: &[usize]) -> DMatrix<f64> {
    let d = p.len();
    DMatrix::from_fn(d, d, |x, y| if x == p[y] { 1.0 } else { 0.0 })
}

fn oracle_channel(m: &ExpanderModel, rho: &DMatrix<f64>, pinned: bool) -> DMatrix<f64> {
    let d = m.d();
    let k = m.k() as f64;
    let mut out = DMatrix::zeros(d, d);
    for p in m.perms() {
        let pm = perm_matrix(p);
        out += &pm * rho * pm.transpose() / k;
    }
    if pinned {
        let pi = DMatrix::from_fn(d, d, |x, y| if x == y && x < d / 2 { 1.0 } else { 0.0 });
        let pib = DMatrix::identity(d, d) - &pi;
        out = out * m.q() + (&pi * rho * &pi + &pib * rho * &pib) * (1.0 - m.q());
    }
    out
}

fn random_symmetric(d: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng::stream(seed, 3);
    let a = DMatrix::from_fn(d, d, |_, _| rng::normal(&mut r));
    &a + a.transpose()
}

fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn model_validation() {
    let id: Vec<usize> = (0..4).collect();
    assert!(matches!(ExpanderModel::new(4, 3, vec![id.clone(); 3], 0.5), Err(ArealawError::BadK(3))));
    assert!(matches!(ExpanderModel::new(5, 2, vec![(0..5).collect(); 2], 0.5), Err(ArealawError::BadD(5))));
    assert!(matches!(ExpanderModel::new(4, 2, vec![id.clone()], 0.5), Err(ArealawError::PermCount { .. })));
    assert!(matches!(
        ExpanderModel::new(4, 2, vec![vec![0, 0, 1, 2], id.clone()], 0.5),
        Err(ArealawError::NotBijection(0))
    ));
    assert!(matches!(
        ExpanderModel::new(4, 2, vec![vec![1, 2, 3, 0], vec![1, 2, 3, 0]], 0.5),
        Err(ArealawError::PairingViolated(1))
    ));
    assert!(matches!(ExpanderModel::new(4, 2, vec![id.clone(); 2], 1.0), Err(ArealawError::BadMixing(_))));
    assert!(ExpanderModel::new(4, 2, vec![vec![1, 2, 3, 0], vec![3, 0, 1, 2]], 0.5).is_ok());
}

#[test]
fn channel_matches_direct_conjugation() {
    let m = model(8, 1);
    for pinned in [false, true] {
        let s = build_channel(&m, pinned);
        for seed in 0..3 {
            let rho = random_symmetric(8, seed);
            assert!((s.apply(&rho) - oracle_channel(&m, &rho, pinned)).amax() < 1e-14);
        }
        assert!(s.trace_preservation_residual() < 1e-12);
        assert!(s.choi_min_eigenvalue() > -1e-9);
    }
}

#[test]
fn unpinned_fixed_points() {
    let m = model(8, 2);
    let s = build_channel(&m, false);
    let id = DMatrix::<f64>::identity(8, 8) / 8.0;
    let ones = DMatrix::<f64>::from_element(8, 8, 1.0 / 8.0);
    assert!((s.apply(&id) - &id).amax() < 1e-12);
    assert!((s.apply(&ones) - &ones).amax() < 1e-12);
    let spec = channel_spectrum(&s);
    assert_eq!(spec.fixed_point_multiplicity, 2);
    assert!(spec.second_modulus < 1.0 - 1e-3);
}

#[test]
fn pinned_channel_breaks_second_fixed_point() {
    let m = model(8, 2);
    let s = build_channel(&m, true);
    let id = DMatrix::<f64>::identity(8, 8) / 8.0;
    let ones = DMatrix::<f64>::from_element(8, 8, 1.0 / 8.0);
    assert!((s.apply(&id) - &id).amax() < 1e-12);
    assert!((s.apply(&ones) - &ones).amax() > 1e-3);
    assert_eq!(channel_spectrum(&s).fixed_point_multiplicity, 1);
}

#[test]
fn identity_model_channel_is_identity() {
    let m = ExpanderModel::identity(4, 2, 0.5).unwrap();
    let s = build_channel(&m, false);
    assert!((s.matrix() - DMatrix::<f64>::identity(16, 16)).amax() < 1e-15);
    let spec = channel_spectrum(&s);
    assert_eq!(spec.fixed_point_multiplicity, 16);
    assert_eq!(spec.second_modulus, 0.0);
}

#[test]
fn hamiltonian_terms_are_local_projector_sums() {
    let m = model(4, 3);
    let h = build_base_hamiltonian(&m).unwrap();
    assert_eq!(h.dims(), [4, 4, 4, 4]);
    assert!(h.check_support().is_ok());
    assert!(h.hermiticity_residual() < 1e-10);
    assert!(h.min_term_eigenvalue() > -1e-9);
    for t in h.terms() {
        if matches!(t.component, Component::Left | Component::Right) {
            // I − WWᵀ with WᵀW = I on the end site: a projector of corank d
            assert!((&t.op * &t.op - &t.op).amax() < 1e-12);
            assert!((t.op.trace() - (16.0 - 4.0)).abs() < 1e-12);
        }
    }
    let sum = [Component::Left, Component::Middle, Component::Right]
        .iter()
        .map(|&c| h.component(c).dense())
        .fold(DMatrix::zeros(256, 256), |a, b| a + b);
    assert!((sum - h.dense()).amax() < 1e-14);

    let mut r = rng::stream(4, 0);
    let x: Vec<f64> = (0..256).map(|_| rng::normal(&mut r)).collect();
    let y = h.apply(&x);
    let dense_y = h.dense() * nalgebra::DVector::from_vec(x);
    assert!(y.iter().zip(dense_y.iter()).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn base_model_frustration_free_and_doubly_degenerate() {
    for d in [4usize, 8] {
        let m = model(d, 5);
        let h = build_base_hamiltonian(&m).unwrap();
        let r = spectrum_report(&h).unwrap();
        assert!(r.ground_energy.abs() < 1e-9);
        assert_eq!(r.ground_degeneracy, 2);
        let fp = channel_spectrum(&build_channel(&m, false)).fixed_point_multiplicity;
        assert_eq!(r.ground_degeneracy, fp);
        assert!(r.gapped());
        assert!(r.end_site_entropy <= (d as f64).ln() + 1e-10);
        let ev = sorted_eigenvalues(&h.dense());
        assert!(ev[0] > -1e-9);
    }
}

#[test]
fn identity_permutations_are_more_degenerate() {
    let m = ExpanderModel::identity(4, 4, 0.5).unwrap();
    let r = spectrum_report(&build_base_hamiltonian(&m).unwrap()).unwrap();
    assert!(r.ground_energy.abs() < 1e-9);
    assert!(r.ground_degeneracy > 2);
    assert!(channel_spectrum(&build_channel(&m, false)).fixed_point_multiplicity > 2);
}

#[test]
fn primed_model_unique_and_entangled() {
    let m = model(8, 5);
    let h = build_primed_hamiltonian(&m).unwrap();
    assert_eq!(h.dims(), [8, 6, 6, 8]);
    assert!(h.min_term_eigenvalue() > -1e-9);
    assert!(h.hermiticity_residual() < 1e-10);
    let r = spectrum_report(&h).unwrap();
    assert_eq!(r.ground_degeneracy, 1);
    assert!(r.gapped());
    assert!(r.end_site_entropy >= 0.8 * 8f64.ln());
    assert!(r.end_site_entropy <= 8f64.ln() + 1e-10);
    assert_eq!(r.method, SolveMethod::Dense);
}

#[test]
fn primed_model_d16_iterative() {
    let m = model(16, 1);
    let h = build_primed_hamiltonian(&m).unwrap();
    assert_eq!(h.dim(), 16 * 6 * 6 * 16);
    let r = spectrum_report(&h).unwrap();
    match r.method {
        SolveMethod::Lanczos { max_residual } => assert!(max_residual < 1e-8),
        SolveMethod::Dense => panic!("expected the iterative solver"),
    }
    assert_eq!(r.ground_degeneracy, 1);
    assert!(r.gapped());
    assert!(r.end_site_entropy >= 0.8 * 16f64.ln());
}

#[test]
fn lanczos_agrees_with_dense() {
    let m = model(4, 7);
    for h in [build_base_hamiltonian(&m).unwrap(), build_primed_hamiltonian(&m).unwrap()] {
        let a = spectrum_report_with(&h, false).unwrap();
        let b = spectrum_report_with(&h, true).unwrap();
        assert!((a.ground_energy - b.ground_energy).abs() < 1e-8);
        assert_eq!(a.ground_degeneracy, b.ground_degeneracy);
        assert!((a.spectral_gap.unwrap() - b.spectral_gap.unwrap()).abs() < 1e-6);
        assert!((a.end_site_entropy - b.end_site_entropy).abs() < 1e-6);
    }
}

#[test]
fn zero_hamiltonian() {
    let h = FourSiteHamiltonian::new([2, 2, 2, 2], vec![]).unwrap();
    let r = spectrum_report(&h).unwrap();
    assert_eq!(r.ground_degeneracy, 16);
    assert_eq!(r.spectral_gap, None);
    assert!(!r.gapped());
}

#[test]
fn isometry_reduction_holds() {
    for d in [4usize, 8] {
        let c = isometry_reduction_check(&model(d, 3)).unwrap();
        assert!(c.isometry_residual < 1e-10);
        assert!(c.min_eigenvalue >= -1e-8, "d={d}: {}", c.min_eigenvalue);
        assert!(c.holds());
    }
}

#[test]
fn projector_gap_examples() {
    let e = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let g = projector_gap_check(&e, &e).unwrap();
    assert!((g.lhs.unwrap() - 2.0).abs() < 1e-12);
    assert!((g.rhs.unwrap() - 0.5).abs() < 1e-12);
    assert!(g.ok);

    let (c, s) = (FRAC_PI_3.cos(), FRAC_PI_3.sin());
    let u = DMatrix::from_row_slice(2, 2, &[c * c, c * s, c * s, s * s]);
    let g = projector_gap_check(&e, &u).unwrap();
    assert!((g.lhs.unwrap() - 0.5).abs() < 1e-12);
    assert!((g.rhs.unwrap() - 0.375).abs() < 1e-12);
    assert!((g.compressed.unwrap() - 0.75).abs() < 1e-12);
    assert!(g.ok);

    let not_proj = DMatrix::from_element(2, 2, 1.0);
    assert!(matches!(projector_gap_check(&not_proj, &e), Err(ArealawError::NotProjector { .. })));
    assert!(matches!(projector_gap_check(&e, &DMatrix::identity(3, 3)), Err(ArealawError::ShapeMismatch)));
}

#[test]
fn projector_gap_seeded_trials() {
    let mut r = rng::stream(99, 0);
    for _ in 0..2_000 {
        let n = r.random_range(1..=16);
        let r0 = r.random_range(0..=n);
        let r1 = r.random_range(0..=n);
        let q0 = random_projector(&mut r, n, r0);
        let q1 = random_projector(&mut r, n, r1);
        assert!(projector_gap_check(&q0, &q1).unwrap().ok);
    }
}

#[test]
fn scan_rows_and_determinism() {
    let cfg = ScanConfig { d_list: vec![4], seeds: 3, pinned: true, ..ScanConfig::default() };
    let rows = scan_models(&cfg).unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert!(row.expanding());
        assert_eq!((row.base_degeneracy, row.primed_degeneracy), (2, 1));
        assert_eq!(row.pinned_fp_multiplicity, Some(1));
        assert!(row.base_ground_energy.abs() < 1e-9);
    }
    assert_eq!(rows, scan_models(&cfg).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_projector_pairs(seed in any::<u64>(), n in 1usize..=16) {
        let mut r = rng::stream(seed, 1);
        let r0 = r.random_range(0..=n);
        let r1 = r.random_range(0..=n);
        let q0 = random_projector(&mut r, n, r0);
        let q1 = random_projector(&mut r, n, r1);
        prop_assert!((&q0 * &q0 - &q0).amax() < 1e-10);
        prop_assert!((q0.trace() - r0 as f64).abs() < 1e-10);
        prop_assert!(projector_gap_check(&q0, &q1).unwrap().ok);
    }

    #[test]
    fn channels_are_cptp(seed in any::<u64>(), half in 1usize..5, pinned in any::<bool>()) {
        let m = ExpanderModel::random(2 * half, 4, 0.5, seed, 0).unwrap();
        let s = build_channel(&m, pinned);
        prop_assert!(s.trace_preservation_residual() < 1e-12);
        prop_assert!(s.choi_min_eigenvalue() > -1e-9);
    }

    #[test]
    fn base_model_always_frustration_free(seed in any::<u64>()) {
        let m = ExpanderModel::random(4, 4, 0.5, seed, 0).unwrap();
        let r = spectrum_report(&build_base_hamiltonian(&m).unwrap()).unwrap();
        prop_assert!(r.ground_energy.abs() < 1e-9);
    }
}
