use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cablefield::cli::RunManifest;
use cablefield::experiments::ExperimentResult;

fn cablefield(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cablefield"))
        .current_dir(dir)
        .args(args)
        .env_remove("CABLEFIELD_LOG")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const RUN_CONFIG: &str = "\
seed = 17

[two-point]
graph = p2
samples = 4000
base = 0
targets = 1

[cap-law]
graph = grid3
samples = 2000
target = 0

[one-arm]
graph = box:3:24
samples = 150
radii = 2,3,4,6
";

#[test]
fn verify_p2_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.conf"), "[verify]\nfixtures = p2\n").unwrap();
    let out = cablefield(dir.path(), &["verify", "--config", "v.conf", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("o/verify.json")).unwrap();
    let rows: Vec<serde_json::Value> = serde_json::from_str(&text).unwrap();
    for key in ["green_factorization", "killed_at_target", "last_exit", "hitting", "capacity", "doob"] {
        assert!(rows[0][key].as_f64().unwrap() < 1e-12, "{key}");
    }
}

#[test]
fn verify_random_graphs_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.conf"), "seed = 7\n[verify]\nfixtures = random:50\n").unwrap();
    let a = cablefield(dir.path(), &["verify", "--config", "v.conf"]);
    let b = cablefield(dir.path(), &["verify", "--config", "v.conf"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 52);
}

#[test]
fn verify_needs_a_seed_for_random_graphs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("v.conf"), "[verify]\nfixtures = random:2\n").unwrap();
    let out = cablefield(dir.path(), &["verify", "--config", "v.conf"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("seed"));
    let out = cablefield(dir.path(), &["verify", "--config", "v.conf", "--seed", "3"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn negative_weight_is_a_line_numbered_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.txt"), "vertices 2\nedge 0 1 -1\nkill 0 1\n").unwrap();
    fs::write(dir.path().join("v.conf"), "[verify]\nfixtures = file:g.txt\n").unwrap();
    let out = cablefield(dir.path(), &["verify", "--config", "v.conf"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn unknown_experiment_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.conf"), RUN_CONFIG).unwrap();
    let out = cablefield(dir.path(), &["run", "--config", "r.conf", "--experiment", "nope"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("two-point, green-gap"));
    let out = cablefield(dir.path(), &["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn missing_seed_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.conf"), "[two-point]\ngraph = p2\nsamples = 10\n").unwrap();
    let out = cablefield(dir.path(), &["run", "--config", "r.conf"]);
    assert_eq!(code(&out), 2);
    let out = cablefield(dir.path(), &["run", "--config", "r.conf", "--seed", "5", "--out", "o"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn runs_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.conf"), RUN_CONFIG).unwrap();
    for (threads, out) in [("1", "a"), ("3", "b")] {
        let run = cablefield(
            dir.path(),
            &["run", "--config", "r.conf", "--threads", threads, "--out", out],
        );
        assert_eq!(code(&run), 0, "{}{}", stdout(&run), stderr(&run));
    }
    for name in ["two-point", "cap-law", "one-arm"] {
        for ext in ["csv", "json"] {
            let file = format!("{name}.{ext}");
            let a = fs::read(dir.path().join("a").join(&file)).unwrap();
            let b = fs::read(dir.path().join("b").join(&file)).unwrap();
            assert_eq!(a, b, "{file}");
        }
        let m = RunManifest::read(&dir.path().join(format!("b/{name}.manifest.json"))).unwrap();
        assert_eq!(m.threads, 3);
        assert_eq!(m.seed, 17);
    }
    let csv = fs::read_to_string(dir.path().join("a/two-point.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("series,x,count,N,estimate,lo,hi,reference"));
    let json = fs::read_to_string(dir.path().join("a/one-arm.json")).unwrap();
    let result: ExperimentResult = serde_json::from_str(&json).unwrap();
    let fit = &result.fits[0];
    assert!(fit.slope.is_finite() && fit.stderr > 0.0);

    let report = cablefield(dir.path(), &["report", "--out", "a"]);
    assert_eq!(code(&report), 0, "{}", stderr(&report));
    assert!(stdout(&report).contains("== one-arm"));
    let dat = fs::read_to_string(dir.path().join("a/one-arm.dat")).unwrap();
    assert!(dat.contains("# fit one-arm"));
    assert!(dat.contains("reference -0.5"));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("r.conf"), RUN_CONFIG).unwrap();
    let run = |seed: &str, out: &str| {
        let o = cablefield(
            dir.path(),
            &["run", "--config", "r.conf", "--experiment", "two-point", "--seed", seed, "--out", out],
        );
        assert_eq!(code(&o), 0);
        fs::read(dir.path().join(out).join("two-point.csv")).unwrap()
    };
    assert_eq!(run("17", "a"), run("17", "b"));
    assert_ne!(run("17", "a"), run("18", "c"));
}

#[test]
fn report_rejects_broken_inputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::create_dir(dir.path().join("empty")).unwrap();
    let out = cablefield(dir.path(), &["report", "--out", "empty"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("manifest"));

    fs::write(dir.path().join("r.conf"), RUN_CONFIG).unwrap();
    let run = cablefield(
        dir.path(),
        &["run", "--config", "r.conf", "--experiment", "two-point", "--out", "o"],
    );
    assert_eq!(code(&run), 0);
    fs::write(dir.path().join("o/two-point.json"), "{\"experiment\": ").unwrap();
    let out = cablefield(dir.path(), &["report", "--out", "o"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn failed_assertion_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // A tolerance of zero cannot be met by a finite sample.
    fs::write(
        dir.path().join("r.conf"),
        "seed = 1\n[crossing]\ngraph = p2\nsamples = 200\nrefinements = 4\ntolerance = 0\n",
    )
    .unwrap();
    let out = cablefield(dir.path(), &["run", "--config", "r.conf", "--out", "o"]);
    assert_eq!(code(&out), 1, "{}", stdout(&out));
    assert!(dir.path().join("o/crossing.manifest.json").exists());
}
