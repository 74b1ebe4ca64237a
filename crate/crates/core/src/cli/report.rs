use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::closed_forms::exponent_references;
use crate::experiments::{ExperimentResult, GraphSpec, SlopeFit};

use super::manifest::{write_atomically, RunManifest, MANIFEST_SUFFIX};
use super::{CliError, Outcome};

pub(super) fn cmd_report(dir: &Path) -> Result<Outcome, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut manifests: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(MANIFEST_SUFFIX))
        })
        .collect();
    manifests.sort();
    if manifests.is_empty() {
        return Err(CliError::Input(format!("no manifest in {}", dir.display())));
    }
    for path in manifests {
        let manifest = RunManifest::read(&path)?;
        let json = dir.join(format!("{}.json", manifest.experiment));
        let text = fs::read_to_string(&json).map_err(|e| CliError::io(&json, e))?;
        let result: ExperimentResult = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("{}: {e}", json.display())))?;
        print!("{}", render_table(&manifest, &result));
        let alpha = volume_exponent(&manifest);
        let data = gnuplot_data(&result, |fit| reference_slope(fit, alpha));
        write_atomically(
            &dir.join(format!("{}.dat", manifest.experiment)),
            data.as_bytes(),
        )?;
    }
    Ok(Outcome::Passed)
}

fn volume_exponent(manifest: &RunManifest) -> Option<f64> {
    manifest.alpha.or_else(|| match manifest.graph.parse::<GraphSpec>() {
        Ok(GraphSpec::LatticeBox { dimension, .. }) => Some(dimension as f64),
        _ => None,
    })
}

/// Reference slope of a fit, recomputed from the exponent table when the
/// graph's volume growth is known.
fn reference_slope(fit: &SlopeFit, alpha: Option<f64>) -> f64 {
    let Some(refs) = alpha.and_then(|a| exponent_references(a).ok()) else {
        return fit.reference;
    };
    match fit.series.as_str() {
        "one-arm" => refs.one_arm_exponent,
        "survival" => refs.cap_tail_exponent,
        _ => fit.reference,
    }
}

pub fn render_table(manifest: &RunManifest, result: &ExperimentResult) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "== {} (seed {}, N = {}, graph {}, {:.1}s) {}",
        result.experiment,
        result.seed,
        result.samples,
        manifest.graph,
        manifest.runtime_seconds,
        if result.passed() { "PASS" } else { "FAIL" }
    );
    let _ = writeln!(
        out,
        "{:<12} {:>10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7}",
        "series", "x", "count", "estimate", "lo", "hi", "reference", "z"
    );
    for r in &result.rows {
        let reference = r.reference.map_or("-".to_string(), |p| format!("{p:.5}"));
        let z = r.z.map_or("-".to_string(), |z| format!("{z:.2}"));
        let _ = writeln!(
            out,
            "{:<12} {:>10.4} {:>9} {:>9.5} {:>9.5} {:>9.5} {:>9} {:>7}",
            r.series, r.x, r.count, r.estimate, r.lo, r.hi, reference, z
        );
    }
    for f in &result.fits {
        let _ = writeln!(
            out,
            "fit {}: slope {:.4} ± {:.4}, reference {:.4} ± {}",
            f.series, f.slope, f.stderr, f.reference, f.tolerance
        );
    }
    for c in &result.checks {
        let _ = writeln!(
            out,
            "  [{}] {}: {}",
            if c.passed { "ok" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    out
}

fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        "NaN".into()
    }
}

/// Gnuplot blocks separated by two blank lines: one per series with log
/// columns, then one per slope fit holding the fitted and reference lines
/// through the centroid of the fitted points.
pub fn gnuplot_data(result: &ExperimentResult, reference: impl Fn(&SlopeFit) -> f64) -> String {
    let mut out = String::new();
    let mut names: Vec<&str> = Vec::new();
    for r in &result.rows {
        if !names.contains(&r.series.as_str()) {
            names.push(&r.series);
        }
    }
    for name in names {
        let _ = writeln!(out, "# series {name}");
        let _ = writeln!(out, "# x estimate lo hi reference log_x log_estimate");
        for r in result.series(name) {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                num(r.x),
                num(r.estimate),
                num(r.lo),
                num(r.hi),
                r.reference.map_or("NaN".into(), num),
                num(r.x.ln()),
                num(r.estimate.ln())
            );
        }
        out.push_str("\n\n");
    }
    for fit in &result.fits {
        let pts: Vec<(f64, f64)> = result
            .series(&fit.series)
            .map(|r| (r.x.ln(), r.estimate.ln()))
            .filter(|(lx, lp)| lx.is_finite() && lp.is_finite())
            .collect();
        if pts.is_empty() {
            continue;
        }
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let cy = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let slope_ref = reference(fit);
        let _ = writeln!(
            out,
            "# fit {} slope {} stderr {} reference {}",
            fit.series,
            num(fit.slope),
            num(fit.stderr),
            num(slope_ref)
        );
        let _ = writeln!(out, "# log_x fitted reference");
        for (lx, _) in &pts {
            let _ = writeln!(
                out,
                "{} {} {}",
                num(*lx),
                num(cy + fit.slope * (lx - cx)),
                num(cy + slope_ref * (lx - cx))
            );
        }
        out.push_str("\n\n");
    }
    out
}
