use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bachlike_verify::Report;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bachlike"));
    for var in [
        "SEED",
        "JET_ORDER",
        "QUADRATURE",
        "TOLERANCE",
        "OUT",
        "THREADS",
    ] {
        c.env_remove(format!("BACHLIKE_{var}"));
    }
    c
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("manifests")
        .join(name)
}

fn write_manifest(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("m.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn suite(manifest: &Path, args: &[&str]) -> (Output, Option<Report>) {
    let out = bin()
        .arg("suite")
        .arg(manifest)
        .args(args)
        .output()
        .unwrap();
    let report = serde_json::from_slice(&out.stdout).ok();
    (out, report)
}

const SMALL: &str = r#"
[geometry]
name = "RAND"
with_potential = true

[suite]
identities = ["pointwise-all"]
samples = 4
"#;

#[test]
fn default_manifest_passes() {
    let (out, report) = suite(&shipped("default.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = report.unwrap();
    assert_eq!(report.schema, "v1");
    assert!(report.identities.len() >= 20);
    assert!(report
        .identities
        .iter()
        .all(|r| r.verdict.as_str() == "PASS"));
    assert!(report
        .identities
        .iter()
        .any(|r| r.id == "bach-decomposition"));
    assert_eq!(report.regimes.len(), 81);
    assert_eq!(report.run.samples, 200);
}

#[test]
fn classify_prints_a_verdict() {
    for (a, b, regime) in [
        ("0.5", "0.16666666666666666", "BACH-LINE"),
        ("0", "1", "V-ONLY"),
        ("1", "0", "OPEN"),
        ("-1", "-1", "LAMBDA"),
    ] {
        let out = bin().args(["classify", a, b]).output().unwrap();
        assert_eq!(out.status.code(), Some(0));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["regime"], regime, "({a}, {b})");
    }
    let out = bin().args(["classify", "0", "1"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["conclusion"], "Einstein or Gaussian soliton");
    assert_eq!(v["in_lambda"], true);
}

#[test]
fn grid_writes_the_lattice() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path(), "[geometry]\nname = \"E4\"\n");
    let path = dir.path().join("grid.json");
    let out = bin()
        .arg("grid")
        .arg(&manifest)
        .arg("--out")
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let report: Report = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report.regimes.len(), 81);
    assert!(report.identities.is_empty());
}

#[test]
fn low_jet_order_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "[geometry]\nname = \"RAND\"\n[suite]\nidentities = [\"divergence-u\", \"divergence-v\"]\njet_order = 3\n",
    );
    let (out, _) = suite(&manifest, &[]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(
        msg.contains("needs order 5") && msg.contains("only 3"),
        "{msg}"
    );
    let (out, _) = suite(&write_manifest(dir.path(), SMALL), &["--jet-order", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (out, _) = suite(&dir.path().join("missing.toml"), &[]);
    assert_eq!(out.status.code(), Some(2));
    for text in [
        "[geometry\n",
        "[geometry]\nname = \"T4\"\n",
        "[geometry]\nname = \"E4\"\n[suite]\nidentities = [\"nope\"]\n",
    ] {
        let (out, _) = suite(&write_manifest(dir.path(), text), &[]);
        assert_eq!(out.status.code(), Some(2), "{text}");
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(
        bin().arg("frobnicate").output().unwrap().status.code(),
        Some(2)
    );
}

#[test]
fn failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report) = suite(
        &write_manifest(dir.path(), SMALL),
        &["--tolerance", "1e-30"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(report.unwrap().summary.fail > 0);
}

#[test]
fn flags_and_environment_override_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path(), SMALL);
    let (_, report) = suite(&manifest, &["--seed", "11", "--quadrature", "6"]);
    let run = report.unwrap().run;
    assert_eq!((run.seed, run.quadrature), (11, 6));
    let out = bin()
        .arg("suite")
        .arg(&manifest)
        .env("BACHLIKE_SEED", "13")
        .output()
        .unwrap();
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.run.seed, 13);
    let path = dir.path().join("r.json");
    let out = bin()
        .arg("suite")
        .arg(&manifest)
        .env("BACHLIKE_OUT", &path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("pass, 0 fail"));
    assert!(path.exists());
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        r#"
[geometry]
name = ["RAND", "CYL"]
with_potential = true

[suite]
identities = ["all"]
samples = 6

[quadrature]
q = 6
levels = [5.0]
decay_alpha = 1.0
decay_levels = [2.0, 3.0]

[output]
grid_alpha = [-1.0, 1.0, 0.5]
grid_beta = [-1.0, 1.0, 0.5]
"#,
    );
    let runs: Vec<Vec<u8>> = [
        &["--threads", "1"][..],
        &["--threads", "1"],
        &["--threads", "3"],
    ]
    .iter()
    .map(|args| suite(&manifest, args).0.stdout)
    .collect();
    assert!(!runs[0].is_empty());
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn lemmas_on_flat_space_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "[geometry]\nname = \"E4\"\n[suite]\nidentities = [\"lemmas\"]\n[quadrature]\nq = 4\nlevels = [1.0]\n",
    );
    let (out, report) = suite(&manifest, &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = report.unwrap();
    assert!(!report.identities.is_empty());
    assert!(report
        .identities
        .iter()
        .all(|r| r.verdict.as_str() == "SKIPPED-HYPOTHESIS"));
}

#[test]
fn soliton_suite_on_the_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(
        dir.path(),
        "[geometry]\nname = \"S4\"\n[suite]\nidentities = [\"soliton-all\"]\nsamples = 10\n",
    );
    let (out, report) = suite(&manifest, &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = report.unwrap();
    for id in [
        "einstein-u-vanishes",
        "einstein-v-vanishes",
        "einstein-scalar-two",
        "soliton-equation",
    ] {
        let r = report.identities.iter().find(|r| r.id == id).unwrap();
        assert_eq!(r.verdict.as_str(), "PASS", "{id}");
    }
}
