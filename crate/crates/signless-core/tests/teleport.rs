use nalgebra::DMatrix;
use proptest::prelude::*;
use signless_core::teleport::{
    analyze, construct_no_positivity_state, construct_qubit_teleport_state, general_rho_a_reduction,
    majorization_feasible, nonneg_projector_blocks, one_big_diagnostics, post_measurement_vectors,
    strict_decrease_scan, symmetrize_over_permutations, symmetrized_rho_ac, uhlmann_decompose, verify_residual,
    ScanOptions, TeleportError, TripartiteSplit, VectorPair,
};
use signless_core::{rng, DensityMatrix, Ket, SchmidtSpectrum, SiteLayout, C64};

fn layout(dims: &[usize]) -> SiteLayout {
    SiteLayout::new(dims.to_vec()).unwrap()
}

fn spec(v: &[f64]) -> SchmidtSpectrum {
    SchmidtSpectrum::new(v.to_vec()).unwrap()
}

fn bell() -> Ket {
    let h = 0.5f64.sqrt();
    Ket::from_real(layout(&[2, 2]), vec![h, 0.0, 0.0, h]).unwrap()
}

fn random_nonneg(dims: &[usize], seed: u64) -> Ket {
    let mut r = rng::stream(seed, 7);
    let n: usize = dims.iter().product();
    Ket::from_real_normalized(layout(dims), rng::abs_normals(&mut r, n)).unwrap()
}

fn three_site() -> TripartiteSplit {
    TripartiteSplit::three_site()
}

fn entropy_of(m: &DMatrix<C64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().filter(|&&x| x > 1e-14).map(|&x| -x * x.ln()).sum()
}

// Brute-force quantities on a three-site ket (A, B, C).
struct Oracle {
    defect: f64,
    avg_post_entropy: f64,
    s_a: f64,
}

fn oracle(psi: &Ket) -> Oracle {
    let d = psi.dims();
    let (da, db, dc) = (d[0], d[1], d[2]);
    let amp = |i: usize, j: usize, k: usize| psi.amplitudes()[(i * db + j) * dc + k];
    let mut rho_ac = DMatrix::<C64>::zeros(da * dc, da * dc);
    for i in 0..da {
        for k in 0..dc {
            for i2 in 0..da {
                for k2 in 0..dc {
                    let s: C64 = (0..db).map(|j| amp(i, j, k) * amp(i2, j, k2).conj()).sum();
                    rho_ac[(i * dc + k, i2 * dc + k2)] = s;
                }
            }
        }
    }
    let mut rho_a = DMatrix::<C64>::zeros(da, da);
    let mut rho_c = DMatrix::<C64>::zeros(dc, dc);
    for i in 0..da {
        for i2 in 0..da {
            rho_a[(i, i2)] = (0..dc).map(|k| rho_ac[(i * dc + k, i2 * dc + k)]).sum();
        }
    }
    for k in 0..dc {
        for k2 in 0..dc {
            rho_c[(k, k2)] = (0..da).map(|i| rho_ac[(i * dc + k, i * dc + k2)]).sum();
        }
    }
    let diff = &rho_ac - rho_a.kronecker(&rho_c);
    let defect = diff.symmetric_eigenvalues().iter().map(|x| x.abs()).sum();
    let mut avg = 0.0;
    for j in 0..db {
        let m = DMatrix::from_fn(da, dc, |i, k| amp(i, j, k));
        let r = &m * m.adjoint();
        let p = r.trace().re;
        if p > 1e-14 {
            avg += p * entropy_of(&(r / C64::new(p, 0.0)));
        }
    }
    Oracle { defect, avg_post_entropy: avg, s_a: entropy_of(&rho_a) }
}

fn qubit_rho(p_up: f64, s: f64) -> DensityMatrix {
    let off = s * (p_up * (1.0 - p_up)).sqrt();
    DensityMatrix::from_real(layout(&[2]), DMatrix::from_row_slice(2, 2, &[p_up, off, off, 1.0 - p_up])).unwrap()
}

#[test]
fn bell_pairs_with_middle_measured() {
    let psi = bell().tensor(&bell()).unwrap();
    let split = TripartiteSplit::new(psi.layout(), &[0], &[1, 2], &[3]).unwrap();
    let r = analyze(&psi, &split).unwrap();
    assert!(r.factorization_defect < 1e-12);
    assert!(r.avg_post_entropy.abs() < 1e-12);
    assert_eq!(r.outcomes, 4);
    assert!((r.s_a - 2f64.ln()).abs() < 1e-12);
    assert!(r.ratio.unwrap().abs() < 1e-12);
}

#[test]
fn decoupled_b_keeps_entropy() {
    let c = random_nonneg(&[3], 1);
    // sites: A, C0 (Bell partner of A), B, C1
    let psi = bell().tensor(&Ket::basis(layout(&[2]), 0)).unwrap().tensor(&c).unwrap();
    let split = TripartiteSplit::new(psi.layout(), &[0], &[2], &[1, 3]).unwrap();
    let r = analyze(&psi, &split).unwrap();
    assert!((r.avg_post_entropy - 2f64.ln()).abs() < 1e-12);
    assert!((r.ratio.unwrap() - 1.0).abs() < 1e-12);
    assert!(r.equal_post_states);
}

#[test]
fn analyze_matches_brute_force() {
    for seed in 0..6 {
        let psi = random_nonneg(&[2, 3, 2], seed);
        let r = analyze(&psi, &three_site()).unwrap();
        let o = oracle(&psi);
        assert!((r.factorization_defect - o.defect).abs() < 1e-10);
        assert!((r.avg_post_entropy - o.avg_post_entropy).abs() < 1e-10);
        assert!((r.s_a - o.s_a).abs() < 1e-10);
    }
}

#[test]
fn split_validation() {
    let l = layout(&[2, 2, 2]);
    assert_eq!(TripartiteSplit::new(&l, &[0], &[1], &[1]), Err(TeleportError::BadSplit));
    assert_eq!(TripartiteSplit::new(&l, &[0], &[1], &[]), Err(TeleportError::BadSplit));
    assert_eq!(TripartiteSplit::new(&l, &[0], &[1], &[3]), Err(TeleportError::BadSplit));
    assert!(TripartiteSplit::new(&l, &[2], &[0], &[1]).is_ok());
}

#[test]
fn majorization_examples() {
    assert!(majorization_feasible(&spec(&[0.5, 0.5]), 2).unwrap());
    assert!(!majorization_feasible(&spec(&[0.9, 0.1]), 2).unwrap());
    assert!(majorization_feasible(&spec(&[0.5, 0.3, 0.2]), 2).unwrap());
    assert!(majorization_feasible(&spec(&[1.0]), 1).unwrap());
    assert!(matches!(majorization_feasible(&spec(&[1.0]), 0), Err(TeleportError::BadDimension)));
}

#[test]
fn uhlmann_examples() {
    let t = spec(&[0.5, 0.3, 0.2]);
    let d = uhlmann_decompose(&t, &t).unwrap();
    assert_eq!(d.probabilities, vec![1.0]);
    assert_eq!(d.permutations, vec![vec![0, 1, 2]]);

    let d = uhlmann_decompose(&spec(&[0.5, 0.25, 0.25]), &spec(&[0.5, 0.5, 0.0])).unwrap();
    assert_eq!(d.probabilities.len(), 2);
    assert!(d.residual() < 1e-12);

    let target = [0.4, 0.3, 0.2, 0.1];
    let d = uhlmann_decompose(&spec(&target), &SchmidtSpectrum::flat(2, 4)).unwrap();
    assert!(d.probabilities.len() <= 10);
    // reconstruct by hand from the permutation tables
    let tau = [0.5, 0.5, 0.0, 0.0];
    for (i, &y) in target.iter().enumerate() {
        let x: f64 = d.probabilities.iter().zip(&d.permutations).map(|(p, perm)| p * tau[perm[i]]).sum();
        assert!((x - y).abs() < 1e-10);
    }
    let total: f64 = d.probabilities.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(d.probabilities.iter().all(|&p| p > 0.0));
}

#[test]
fn uhlmann_rejects_unmajorized() {
    assert_eq!(
        uhlmann_decompose(&spec(&[0.6, 0.4]), &SchmidtSpectrum::flat(2, 2)),
        Err(TeleportError::MajorizationViolated)
    );
}

#[test]
fn no_positivity_construction() {
    let mixed = DensityMatrix::maximally_mixed(layout(&[2]));
    let psi = construct_no_positivity_state(&mixed, 2).unwrap();
    let r = analyze(&psi, &three_site()).unwrap();
    assert!((r.ratio.unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(r.outcomes, 4);

    let rho_c = DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap();
    let psi = construct_no_positivity_state(&rho_c, 2).unwrap();
    let r = analyze(&psi, &three_site()).unwrap();
    assert!(r.equal_post_states);
    let o = oracle(&psi);
    assert!(o.defect < 1e-9);
    assert!((o.avg_post_entropy - 2f64.ln()).abs() < 1e-9);
    let c = signless_core::qstate::partial_trace(&psi, &[2]).unwrap();
    assert!((c.matrix() - rho_c.matrix()).norm() < 1e-10);
    let diag = one_big_diagnostics(&psi, &three_site()).unwrap();
    assert_eq!(diag.small_ok(), Some(true));
    assert_eq!(diag.small_small_ok(), Some(true));

    let bad = DensityMatrix::diagonal(&[0.6, 0.4]).unwrap();
    assert_eq!(construct_no_positivity_state(&bad, 2), Err(TeleportError::Infeasible { d_a: 2 }));
}

#[test]
fn rho_a_reduction() {
    let max = construct_no_positivity_state(&DensityMatrix::diagonal(&[0.5, 0.3, 0.2]).unwrap(), 2).unwrap();
    let red = general_rho_a_reduction(&max, &three_site()).unwrap();
    let ov = red.state.inner(&max).unwrap().norm();
    assert!((ov - 1.0).abs() < 1e-12);

    // qubit A with P↑ = 0.8
    let (u, d) = (0.8f64.sqrt(), 0.2f64.sqrt());
    let a = Ket::from_real(layout(&[2, 2]), vec![0.6 * u, 0.8 * u, 0.8 * d, 0.6 * d]).unwrap();
    let psi = a.tensor(&random_nonneg(&[2], 3)).unwrap();
    let rho = signless_core::qstate::partial_trace(&psi, &[0]).unwrap();
    assert!((rho.matrix()[(0, 0)].re - 0.8).abs() < 1e-12);
    let red = general_rho_a_reduction(&psi, &three_site()).unwrap();
    let tilde = signless_core::qstate::partial_trace(&red.state, &[0]).unwrap();
    let half = DMatrix::<C64>::identity(2, 2) * C64::new(0.5, 0.0);
    assert!((tilde.matrix() - half).norm() < 1e-10);
    assert!(red.consistent());

    let product = Ket::basis(layout(&[2, 2, 2]), 0);
    assert!(matches!(general_rho_a_reduction(&product, &three_site()), Err(TeleportError::SingularRhoA { .. })));
}

#[test]
fn product_state_identities() {
    let psi = random_nonneg(&[2], 1).tensor(&random_nonneg(&[3], 2)).unwrap().tensor(&random_nonneg(&[2], 3)).unwrap();
    let pmv = post_measurement_vectors(&psi, &three_site()).unwrap();
    assert!(pmv.find_residual < 1e-14);
    assert!(pmv.outer_precondition_met);
    let diag = one_big_diagnostics(&psi, &three_site()).unwrap();
    assert!(diag.p_small.abs() < 1e-12);
    assert!(diag.p_small_small.abs() < 1e-12);
    let sym = symmetrize_over_permutations(&psi, &three_site()).unwrap();
    assert!(sym.factorization_defect < 1e-12);
}

#[test]
fn symmetrized_states_satisfy_find() {
    // every outcome of B uses a permutation of one fixed C vector, so the uniform-vector test passes
    let g = [0.2, 0.5, 0.9];
    let alpha = [0.3, 0.7, 0.1, 0.4, 0.6, 0.2];
    let perms = [[0, 1, 2], [2, 0, 1], [1, 2, 0]];
    let l = layout(&[2, 3, 3]);
    let mut amps = vec![0.0; l.total()];
    for i in 0..2 {
        for j in 0..3 {
            for k in 0..3 {
                amps[l.index(&[i, j, k])] = alpha[i * 3 + j] * g[perms[j][k]];
            }
        }
    }
    let phi = Ket::from_real_normalized(l, amps).unwrap();
    assert!(verify_residual(&phi, &three_site()).unwrap() < 1e-12);
    let sym = symmetrize_over_permutations(&phi, &three_site()).unwrap();
    assert!(sym.verify_holds());
    assert!(sym.factorization_defect < 1e-9);
    let pmv = post_measurement_vectors(&sym.state, &three_site()).unwrap();
    assert!(pmv.find_residual < 1e-9);
    let direct = symmetrized_rho_ac(&phi, &three_site()).unwrap();
    let via_state = signless_core::qstate::partial_trace(&sym.state, &[0, 2]).unwrap();
    assert!((direct.matrix() - via_state.matrix()).norm() < 1e-12);
}

#[test]
fn symmetrization_needs_uniform_vector_condition() {
    let l = layout(&[2, 1, 2]);
    let phi = Ket::from_real_normalized(l, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
    let sym = symmetrize_over_permutations(&phi, &three_site()).unwrap();
    assert!(!sym.verify_holds());
    assert!(sym.factorization_defect > 1e-3);
    let pmv = post_measurement_vectors(&sym.state, &three_site()).unwrap();
    assert!(!pmv.outer_precondition_met);
    let diag = one_big_diagnostics(&sym.state, &three_site()).unwrap();
    assert_eq!(diag.small_ok(), None);
}

#[test]
fn qubit_construction_with_explicit_pair() {
    let s: f64 = 0.96;
    let eps = ((1.0 - s * s) / 2.0).sqrt();
    let pair2 = VectorPair { v: vec![1.0, 0.0, 0.0], w: vec![s, eps, eps] };
    let c = construct_qubit_teleport_state(&qubit_rho(0.5, s), 3, None, Some(pair2)).unwrap();
    assert!((c.s - s).abs() < 1e-12);
    assert!((0.0..=1.0).contains(&c.mixing));
    let o = oracle(&c.state);
    assert!(o.defect < 1e-8);
    assert!(c.report.equal_post_states);
    let rho = signless_core::qstate::partial_trace(&c.state, &[0]).unwrap();
    assert!((rho.matrix()[(0, 1)].re - 0.48).abs() < 1e-10);
    assert!(c.state.is_nonneg());
    // four branches, each blown up by the 3! permutations of C
    assert_eq!(c.state.dims(), &[2, 24, 3]);
}

#[test]
fn qubit_construction_searches_pair() {
    let c = construct_qubit_teleport_state(&qubit_rho(0.6, 0.97), 3, None, None).unwrap();
    assert!(c.pair2.lhs() <= c.s + 1e-10);
    assert!(c.report.factorization_defect < 1e-8);
}

#[test]
fn qubit_construction_trivial_and_infeasible() {
    let c = construct_qubit_teleport_state(&qubit_rho(0.5, 1.0), 2, None, None).unwrap();
    assert_eq!(c.pair2.v, c.pair2.w);
    assert!(c.report.factorization_defect < 1e-8);
    assert!(matches!(
        construct_qubit_teleport_state(&qubit_rho(0.5, 0.9), 2, None, None),
        Err(TeleportError::InfeasiblePair { d: 2, .. })
    ));
    assert!(matches!(
        construct_qubit_teleport_state(&qubit_rho(0.6, 0.5), 3, None, None),
        Err(TeleportError::InfeasiblePair { d: 3, .. })
    ));
}

#[test]
fn projector_block_examples() {
    let id = DMatrix::<f64>::identity(4, 4);
    let b = nonneg_projector_blocks(&id).unwrap();
    assert_eq!(b.blocks.len(), 4);
    assert!(b.consistent());

    let p = DMatrix::from_element(2, 2, 0.5);
    let b = nonneg_projector_blocks(&p).unwrap();
    assert_eq!(b.blocks.len(), 1);

    // |v⟩⟨v| ⊕ 0 ⊕ |w⟩⟨w| on 6 coordinates, then shuffled
    let v = [0.6, 0.8];
    let w = [1.0 / 3f64.sqrt(); 3];
    let mut base = DMatrix::<f64>::zeros(6, 6);
    for x in 0..2 {
        for y in 0..2 {
            base[(x, y)] = v[x] * v[y];
        }
    }
    for x in 0..3 {
        for y in 0..3 {
            base[(3 + x, 3 + y)] = w[x] * w[y];
        }
    }
    let shuffle = [4, 0, 2, 5, 1, 3];
    let p = DMatrix::from_fn(6, 6, |i, j| base[(shuffle[i], shuffle[j])]);
    let b = nonneg_projector_blocks(&p).unwrap();
    assert_eq!(b.blocks.len(), 2);
    assert_eq!(b.zero_coords.len(), 1);
    assert!(b.consistent());
    assert!((b.reassemble() - &p).abs().max() < 1e-12);
    let mut sizes: Vec<usize> = b.blocks.iter().map(|x| x.coords.len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![2, 3]);

    let not_proj = DMatrix::from_element(2, 2, 1.0);
    assert!(matches!(nonneg_projector_blocks(&not_proj), Err(TeleportError::NotProjector { .. })));
}

#[test]
fn scan_frozen_values() {
    let opts = ScanOptions { samples: 300, d_a: 2, d_b: 2, d_c: 3, seed: 1 };
    let r = strict_decrease_scan(&opts).unwrap();
    assert_eq!(r.retained, 200);
    assert_eq!(r.rejected, 100);
    assert_eq!(r.violations, 0);
    assert!(r.max_find_residual < 1e-12);
    assert!((r.max_ratio.unwrap() - 0.115_25).abs() < 5e-5, "{:?}", r.max_ratio);
    let again = strict_decrease_scan(&opts).unwrap();
    assert_eq!(r, again);
}

#[test]
fn scan_qubit_pair_stays_below_one() {
    let opts = ScanOptions { samples: 120, d_a: 2, d_b: 2, d_c: 2, seed: 3 };
    let r = strict_decrease_scan(&opts).unwrap();
    assert_eq!(r.violations, 0);
    if let Some(m) = r.max_ratio {
        assert!(m < 1.0);
    }
    for rec in &r.records {
        assert!(rec.ratio.unwrap_or(0.0) <= 1.0 + 1e-9);
        if !rec.in_scope() {
            assert!(rec.s_a <= 0.01 || rec.s_c <= 0.01);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ratio_never_exceeds_one(seed in any::<u64>(), db in 1usize..4) {
        let psi = random_nonneg(&[2, db, 3], seed);
        let r = analyze(&psi, &three_site()).unwrap();
        if let Some(x) = r.ratio {
            prop_assert!(x <= 1.0 + 1e-9);
        }
        prop_assert!(r.avg_post_entropy <= r.s_a + 1e-9);
    }

    #[test]
    fn uhlmann_reconstructs_any_feasible_target(raw in prop::collection::vec(0.01f64..1.0, 4)) {
        let total: f64 = raw.iter().sum();
        let mut t: Vec<f64> = raw.iter().map(|x| x / total).collect();
        t.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let target = spec(&t);
        let tau = SchmidtSpectrum::flat(1, 4);
        let d = uhlmann_decompose(&target, &tau).unwrap();
        prop_assert!(d.residual() < 1e-10);
        prop_assert!(d.probabilities.len() <= 10);
    }

    #[test]
    fn symmetrized_rho_ac_matches_state(seed in any::<u64>()) {
        let phi = random_nonneg(&[2, 2, 3], seed);
        let sym = symmetrize_over_permutations(&phi, &three_site()).unwrap();
        let direct = symmetrized_rho_ac(&phi, &three_site()).unwrap();
        let via = signless_core::qstate::partial_trace(&sym.state, &[0, 2]).unwrap();
        prop_assert!((direct.matrix() - via.matrix()).norm() < 1e-10);
    }
}
