use std::path::Path;
use std::process::{Command, Output};

use signless_core::io::{read_state, write_state};
use signless_core::{Ket, SiteLayout, C64};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_signless")).args(args).current_dir(dir).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn lhs_prints_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["feasibility", "lhs", "--v", "1,0", "--w", "0.6,0.8"], dir.path());
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("d,lhs,inner"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let lhs: f64 = row[1].parse().unwrap();
    assert!((lhs - 2.0 * 1.4 / (1.0 + 1.96)).abs() < 1e-15);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["teleport", "scan", "--bogus"], dir.path())), 1);
    assert_eq!(code(&run(&["nothing"], dir.path())), 1);
    assert_eq!(code(&run(&["chain", "analyze", "--state", "missing.json"], dir.path())), 1);
    assert_eq!(code(&run(&["twist", "decompose", "--op", "x.json", "--regions", "0|1"], dir.path())), 1);
}

#[test]
fn negative_tolerance_fails_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["teleport", "scan", "--samples", "10", "--tolerance", "-1"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn config_file_supplies_flags_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.json"), r#"{"samples": 12, "dims": [2, 2, 2]}"#).unwrap();
    let a = run(&["teleport", "scan", "--config", "cfg.json"], dir.path());
    let b = run(&["teleport", "scan", "--samples", "12", "--dims", "2,2,2"], dir.path());
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["teleport", "scan", "--config", "cfg.json", "--samples", "4"], dir.path());
    let d = run(&["teleport", "scan", "--samples", "4", "--dims", "2,2,2"], dir.path());
    assert_eq!(c.stdout, d.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn scans_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["teleport", "scan", "--samples", "30", "--seed", "7"];
    assert_eq!(run(&args, dir.path()).stdout, run(&args, dir.path()).stdout);
    let other = run(&["teleport", "scan", "--samples", "30", "--seed", "8"], dir.path());
    assert_ne!(run(&args, dir.path()).stdout, other.stdout);
}

#[test]
fn report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &[
            "teleport",
            "construct",
            "--spectrum",
            "0.5,0.3,0.2",
            "--emit",
            "report",
            "--manifest",
            "m.json",
            "--out",
            "r.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 1);
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    assert!(dir.path().join("m.json").exists());
}

#[test]
fn csv_headers_name_units() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["teleport", "scan", "--samples", "3"], dir.path());
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert!(header.contains("_nats"));
}

#[test]
fn factory_then_analyze_and_reconstruct() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["chain", "factory", "--order", "2", "--state-out", "f.json"], dir.path());
    assert_eq!(code(&o), 0);
    let a = run(&["chain", "analyze", "--state", "f.json", "--window", "2"], dir.path());
    assert_eq!(code(&a), 0);
    let r = run(&["chain", "reconstruct", "--state", "f.json", "--l", "2", "--state-out", "g.json"], dir.path());
    assert_eq!(code(&r), 0);
    let f = read_state(dir.path().join("f.json"), false).unwrap().ket;
    let g = read_state(dir.path().join("g.json"), false).unwrap().ket;
    assert!((f.inner(&g).unwrap().re - 1.0).abs() < 1e-10);
}

#[test]
fn renormalize_flag_and_nonneg_warning() {
    let dir = tempfile::tempdir().unwrap();
    let off = r#"{"dims":[2,2,2],"amps_re":[0.4995,0,0,0,0,0,0,0.8652],"nonneg":true}"#;
    std::fs::write(dir.path().join("s.json"), off).unwrap();
    let o = run(&["teleport", "analyze", "--state", "s.json", "--split", "1|2|3"], dir.path());
    assert_eq!(code(&o), 1);
    let o = run(
        &["teleport", "analyze", "--state", "s.json", "--split", "1|2|3", "--renormalize", "--emit", "report"],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(!report["notes"].as_array().unwrap().is_empty());

    let neg = r#"{"dims":[2,2,2],"amps_re":[0.6,0,0,0,0,0,0,-0.8],"nonneg":true}"#;
    std::fs::write(dir.path().join("n.json"), neg).unwrap();
    let o = run(&["teleport", "analyze", "--state", "n.json", "--split", "1|2|3"], dir.path());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn twist_eval_identity_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let ket = Ket::normalized(
        SiteLayout::uniform(2, 2).unwrap(),
        vec![C64::new(0.5, 0.0), C64::new(0.1, 0.2), C64::new(0.3, 0.0), C64::new(0.7, -0.1)],
    )
    .unwrap();
    write_state(&ket, dir.path().join("psi.json")).unwrap();
    let op = nalgebra::DMatrix::from_fn(4, 4, |i, j| C64::new((i + 2 * j) as f64 * 0.1, 0.0));
    signless_core::io::write_operator(vec![2, 2], &op, dir.path().join("a.json")).unwrap();
    let o = run(
        &[
            "twist",
            "eval",
            "--ops",
            "a.json,a.json",
            "--regions",
            "1|2",
            "--orderings",
            "1,2|1,2",
            "--op-out",
            "p.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, p) = signless_core::io::read_operator(dir.path().join("p.json")).unwrap();
    assert!((p - &op * &op).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
    let o = run(
        &[
            "twist",
            "eval",
            "--ops",
            "a.json,a.json",
            "--regions",
            "1|2",
            "--orderings",
            "1,2|2,1",
            "--state",
            "psi.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), 0);
}
