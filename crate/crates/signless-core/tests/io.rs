use nalgebra::DMatrix;
use proptest::prelude::*;
use signless_core::io::{
    parse_state, read_operator, read_state, state_to_string, write_operator, write_state, IoError,
};
use signless_core::{Ket, SiteLayout, C64};

fn scratch_path(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("signless-io-{}-{name}", std::process::id()))
}

#[test]
fn state_round_trip_through_file() {
    let layout = SiteLayout::new(vec![2, 3]).unwrap();
    let amps = (0..6).map(|i| C64::new(0.1 * i as f64 + 0.05, -0.03 * i as f64)).collect();
    let ket = Ket::normalized(layout, amps).unwrap();
    let path = scratch_path("state.json");
    write_state(&ket, &path).unwrap();
    let back = read_state(&path, false).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(back.ket.dims(), ket.dims());
    assert_eq!(back.ket.amplitudes(), ket.amplitudes());
    assert!(back.warnings.is_empty());
}

#[test]
fn operator_round_trip_through_file() {
    let m = DMatrix::from_fn(4, 4, |i, j| C64::new(i as f64 - 0.5 * j as f64, (i * j) as f64 / 7.0));
    let path = scratch_path("op.json");
    write_operator(vec![2, 2], &m, &path).unwrap();
    let (layout, back) = read_operator(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(layout.dims(), &[2, 2]);
    assert_eq!(back, m);
}

#[test]
fn false_nonneg_claim_warns() {
    let text = r#"{"dims":[2],"amps_re":[0.6,-0.8],"nonneg":true}"#;
    let s = parse_state(text, false).unwrap();
    assert!(!s.ket.is_nonneg());
    assert_eq!(s.warnings.len(), 1);
}

#[test]
fn slightly_off_norm() {
    let text = r#"{"dims":[2],"amps_re":[0.999,0.0]}"#;
    assert!(matches!(parse_state(text, false), Err(IoError::NotNormalized { .. })));
    let s = parse_state(text, true).unwrap();
    assert!((s.renormalized_from.unwrap() - 0.999).abs() < 1e-15);
    assert!((s.ket.amplitudes()[0].re - 1.0).abs() < 1e-15);
    assert!(!s.warnings.is_empty());
}

#[test]
fn malformed_files() {
    assert!(matches!(parse_state("{", false), Err(IoError::Json(_))));
    assert!(matches!(parse_state(r#"{"dims":[2],"amps_re":[1.0],"x":1}"#, false), Err(IoError::Json(_))));
    assert!(matches!(
        parse_state(r#"{"dims":[2,2],"amps_re":[1.0,0.0]}"#, false),
        Err(IoError::Shape { expected: 4, found: 2 })
    ));
    assert!(matches!(
        parse_state(r#"{"dims":[2],"amps_re":[1.0,0.0],"amps_im":[0.0]}"#, false),
        Err(IoError::Shape { expected: 2, found: 1 })
    ));
    assert!(parse_state(r#"{"dims":[2],"amps_re":[0.0,0.0]}"#, true).is_err());
    assert!(matches!(read_state("/nonexistent/signless.json", false), Err(IoError::Io { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip_is_exact(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6)) {
        let amps: Vec<C64> = raw.iter().map(|&(a, b)| C64::new(a, b)).collect();
        prop_assume!(amps.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-6);
        let ket = Ket::normalized(SiteLayout::new(vec![3, 2]).unwrap(), amps).unwrap();
        let back = parse_state(&state_to_string(&ket), false).unwrap();
        prop_assert_eq!(back.ket.amplitudes(), ket.amplitudes());
        prop_assert!(back.renormalized_from.map_or(true, |n| (n - 1.0).abs() < 1e-12));
    }
}
