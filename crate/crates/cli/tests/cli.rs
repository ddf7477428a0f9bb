use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::Path;
use std::process::{Command, Output};

fn urnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_urnlab")).args(args).output().expect("binary runs")
}

fn run_to(dir: &Path, name: &str, args: &[&str]) -> (Output, Vec<u8>) {
    let out = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_string();
    full.push("--out");
    full.push(&out_str);
    let o = urnlab(&full);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    let bytes = std::fs::read(&out).unwrap();
    (o, bytes)
}

fn digest(bytes: &[u8]) -> u64 {
    let mut h = DefaultHasher::new();
    bytes.hash(&mut h);
    h.finish()
}

fn summary(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("one-line JSON summary on stdout")
}

#[test]
fn exact_law_ssrw1_n100_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (o, bytes) =
        run_to(dir.path(), "law.csv", &["exact-law", "--model", "ssrw1", "--n", "100", "--prune-eps", "0"]);
    let text = String::from_utf8(bytes).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("c1,x1,prob"));
    let probs: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    // every value in -100..=100 is reachable once steps can be skipped
    assert_eq!(probs.len(), 201);
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(!text.contains('\r'));
    let s = summary(&o);
    assert_eq!(s["support"], 201);
    assert_eq!(s["status"], "ok");
}

#[test]
fn lattice_info_ssrw1_spans() {
    let o = urnlab(&["lattice-info", "--model", "ssrw1"]);
    assert!(o.status.success());
    let info: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(info["h_tilde"], 2.0);
    assert_eq!(info["h"], 1.0);
}

#[test]
fn lattice_info_thinned_ssrw2_has_unit_covolume() {
    let o = urnlab(&["lattice-info", "--model", "ssrw2"]);
    let info: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(info["l"], 1.0);
    assert_eq!(info["l_tilde"], 2.0);
}

#[test]
fn oracle_check_triangular_passes() {
    let o = urnlab(&["oracle-check", "--model", "triangular", "--n", "6"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report["result"], "PASS");
}

#[test]
fn exit_codes() {
    // validation
    assert_eq!(urnlab(&["exact-law", "--model", "ssrw1", "--prune-eps", "1e-3"]).status.code(), Some(2));
    assert_eq!(urnlab(&["clt", "--model", "ssrw1", "--n-list", "100,10"]).status.code(), Some(2));
    assert_eq!(urnlab(&["exact-law", "--model", "hexagonal"]).status.code(), Some(2));
    assert_eq!(urnlab(&["simulate"]).status.code(), Some(2));
    // numerical guard: the FFT window cannot fit in a 4-point grid
    let o = urnlab(&["exact-law", "--model", "ssrw1", "--n", "50", "--method", "cf", "--grid", "4"]);
    assert_eq!(o.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["guard"], "WindowTooSmall");
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"model": "right-shift", "n": 5, "format": "json"}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let (_, a) = run_to(dir.path(), "a.json", &["exact-law", "--config", cfg]);
    let law: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(law["n"], 5);
    assert_eq!(law["atoms"].as_array().unwrap().len(), 6);
    let (_, b) = run_to(dir.path(), "b.json", &["exact-law", "--config", cfg, "--n", "2"]);
    let law: serde_json::Value = serde_json::from_slice(&b).unwrap();
    assert_eq!(law["atoms"].as_array().unwrap().len(), 3);
}

#[test]
fn stdout_artifact_without_out() {
    let o = urnlab(&["simulate", "--model", "ssrw2", "--n", "20", "--seed", "3"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("step,c1,c2\n"));
    assert_eq!(text.lines().count(), 21);
    let s: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(s["command"], "simulate");
}

#[test]
fn every_command_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["exact-law", "--model", "triangular", "--n", "40"],
        vec!["exact-law", "--model", "ssrw2", "--n", "30", "--method", "cf", "--format", "json"],
        vec!["simulate", "--model", "ssrw1", "--n", "2000", "--seed", "17"],
        vec!["clt", "--model", "ssrw1", "--n-list", "100,1000"],
        vec!["clt", "--model", "ssrw1", "--random-config", "--reps", "100", "--n-list", "50,500", "--seed", "4"],
        vec!["llt", "--model", "ssrw2", "--n-list", "100,300", "--format", "json"],
        vec!["martingale", "--model", "ssrw2", "--n", "500", "--lambda", "0.3,-0.2", "--seed", "8"],
        vec!["martingale", "--model", "right-shift", "--mode", "second-moment", "--n", "200"],
        vec!["martingale", "--model", "ssrw1", "--mode", "l2-scan", "--n", "200"],
        vec!["lattice-info", "--model", "triangular"],
        vec!["oracle-check", "--model", "ssrw2", "--n", "5"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let (_, a) = run_to(dir.path(), &format!("{i}-a"), args);
        let (_, b) = run_to(dir.path(), &format!("{i}-b"), args);
        assert!(!a.is_empty());
        assert_eq!(digest(&a), digest(&b), "{args:?}");
        assert_eq!(a, b);
    }
}

#[test]
fn seeds_change_simulations() {
    let a = urnlab(&["simulate", "--model", "ssrw1", "--n", "500", "--seed", "1"]).stdout;
    let b = urnlab(&["simulate", "--model", "ssrw1", "--n", "500", "--seed", "2"]).stdout;
    assert_ne!(a, b);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["clt", "--model", "ssrw1", "--random-config", "--reps", "100", "--n-list", "200", "--seed", "12"];
    let one = Command::new(env!("CARGO_BIN_EXE_urnlab")).args(args).env("URNLAB_THREADS", "1").output().unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_urnlab")).args(args).env("URNLAB_THREADS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    assert_eq!(one.stdout, four.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_urnlab")).args(args).env("URNLAB_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
