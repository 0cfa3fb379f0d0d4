use std::fs;
use std::path::Path;
use std::process::Command;

use scenery_core::cli::load_records;
use scenery_core::cli::records::{Summary, TrialBody, TrialRecord};

const BIN: &str = env!("CARGO_BIN_EXE_scenery");

const SMALL: &str = "\
profile = \"small\"
epsilon = 0.1
n = 4
n0 = 3
target_n = 5
horizon_cap = 5000
trials = 40
seed = 9
";

fn scenery(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(BIN).args(args).current_dir(dir).output().unwrap()
}

#[test]
fn batches_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), SMALL).unwrap();
    for out in ["a.jsonl", "b.jsonl"] {
        let o = scenery(&["--config", "exp.toml", "--out", out, "run-batch"], dir.path());
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = fs::read(dir.path().join("a.jsonl")).unwrap();
    let b = fs::read(dir.path().join("b.jsonl")).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b);
    assert_eq!(
        fs::read(dir.path().join("a.summary.json")).unwrap(),
        fs::read(dir.path().join("b.summary.json")).unwrap()
    );

    let o = scenery(&["--config", "exp.toml", "--seed", "10", "--out", "c.jsonl", "run-batch"], dir.path());
    assert!(o.status.success());
    assert_ne!(a, fs::read(dir.path().join("c.jsonl")).unwrap());
}

#[test]
fn records_roundtrip_and_sum_to_summary() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), SMALL).unwrap();
    let o = scenery(&["--config", "exp.toml", "--out", "r.jsonl", "run-batch"], dir.path());
    assert!(o.status.success());
    let path = dir.path().join("r.jsonl");
    let recs = load_records(&path).unwrap();
    assert_eq!(recs.len(), 40);
    let text = fs::read_to_string(&path).unwrap();
    for (line, rec) in text.lines().zip(&recs) {
        assert_eq!(format!("{line}\n"), rec.to_line());
        assert_eq!(&TrialRecord::from_line(line).unwrap(), rec);
        assert!(matches!(rec.body, TrialBody::Point(_)));
    }
    let summary: Summary =
        serde_json::from_slice(&fs::read(dir.path().join("r.summary.json")).unwrap()).unwrap();
    assert_eq!(summary.trials, 40);
    assert_eq!(summary.successes, recs.iter().filter(|r| r.success).count() as u64);
    assert_eq!(summary, Summary::from_records(&recs[0].params_digest, &recs));
}

#[test]
fn interrupted_batch_keeps_complete_records() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), SMALL).unwrap();
    let o = scenery(&["--config", "exp.toml", "--trials", "5", "--out", "r.jsonl", "run-batch"], dir.path());
    assert!(o.status.success());
    let path = dir.path().join("r.jsonl");
    let full = fs::read(&path).unwrap();
    fs::write(&path, &full[..full.len() - 40]).unwrap();
    assert_eq!(load_records(&path).unwrap().len(), 4);
}

#[test]
fn bad_configs_exit_nonzero_with_a_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    for (body, needle) in [
        ("n = 4\nbogus = 1\n", "bogus"),
        ("delta = \"1/50\"\n", "63*delta"),
        ("epsilon = -0.1\n", "epsilon"),
    ] {
        fs::write(dir.path().join("bad.toml"), body).unwrap();
        let o = scenery(&["--config", "bad.toml", "run-batch"], dir.path());
        assert_eq!(o.status.code(), Some(2), "{body}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{body}: {err}");
    }
    let o = scenery(&["--config", "missing.toml", "run-batch"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn zero_trials_are_flagged_and_fail_the_check() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("exp.toml"), SMALL).unwrap();
    let o = scenery(&["--config", "exp.toml", "--trials", "0", "--check", "run-batch"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("success rate undefined"), "{err}");
}

#[test]
fn verification_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let o = scenery(&["verify-oracles"], dir.path());
    assert!(o.status.success());
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().all(|l| l.starts_with("PASS ")), "{out}");
    assert!(out.contains("computed 5/32"));

    let o = scenery(&["verify-lemma2", "--n", "6,8", "--enumerate"], dir.path());
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1 + 2 * 3 * 2);

    fs::write(dir.path().join("exp.toml"), SMALL).unwrap();
    let o = scenery(&["--config", "exp.toml", "--trials", "6", "verify-events"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    assert!(headers.iter().any(|h| h == "profile_hash"));
    assert_eq!(rows.records().count(), 6);

    let o = scenery(&["--config", "exp.toml", "compute-mu", "--window", "243245153"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mu: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let total: f64 = mu["support"].as_array().unwrap().iter().map(|p| p[1].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);

    let a = scenery(&["--config", "exp.toml", "reconstruct-whole", "--index", "3"], dir.path());
    let b = scenery(&["--config", "exp.toml", "reconstruct-whole", "--index", "3"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rec = TrialRecord::from_line(String::from_utf8_lossy(&a.stdout).trim_end()).unwrap();
    assert!(matches!(rec.body, TrialBody::Whole(_)));
}
