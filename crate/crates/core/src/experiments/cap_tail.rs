use std::f64::consts::PI;

use crate::closed_forms::cable_capacity_survival;
use crate::sampler::{cable_cluster, BoxCapacity, CapacityValue, GffSampler, SampleId};

use super::{
    base_vertex, fit_loglog, run_indexed, Check, EstimateRow, ExperimentConfig, ExperimentError,
    ExperimentResult, GreenSource, SlopeFit,
};

/// Fewest samples allowed between the two window percentiles.
const MIN_IN_WINDOW: u64 = 100;

/// Survival of the cable cluster capacity at level 0 in a lattice box and
/// its log-log slope between the 60th and 95th percentiles.
///
/// Capacities far beyond the window are only bounded from below: the
/// cutoff is where the exact survival equals `cutoff_survival`.
pub fn run_cap_tail(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let g = config.graph.build()?;
    if g.lattice().is_none() {
        return Err(ExperimentError::InvalidConfig("cap-tail needs a lattice box".into()));
    }
    let base = base_vertex(config, &g)?;
    let g00 = GreenSource::new(&g)?.get(base, base);
    let boxcap = BoxCapacity::new(&g, config.screen_size).expect("lattice box");
    // (1/π) atan(1/√(u g0 − 1)) = s  ⇔  u = (1 + cot²(πs)) / g0
    let cutoff = (1.0 + 1.0 / (PI * config.cutoff_survival).tan().powi(2)) / g00;
    let sampler = GffSampler::new(&g)?;
    let caps = run_indexed(config.threads, config.samples, |index| {
        let sample = sampler.sample(0.0, SampleId { master: config.seed, index }, &[])?;
        let cluster = cable_cluster(&g, &sample, base);
        if cluster.is_empty() {
            return Ok(CapacityValue::Exact(0.0));
        }
        Ok(boxcap.cable_capacity(&cluster, Some(cutoff))?)
    })?;
    let n = config.samples;
    // censored values rank above every exact one
    let mut ranked: Vec<f64> = caps
        .iter()
        .map(|c| match *c {
            CapacityValue::Exact(v) => v,
            _ => f64::INFINITY,
        })
        .collect();
    ranked.sort_by(f64::total_cmp);
    let quantile = |q: f64| ranked[((q * n as f64).ceil() as usize).clamp(1, ranked.len()) - 1];
    let (t_lo, t_hi) = (quantile(0.60), quantile(0.95));
    if !(t_lo > 0.0 && t_hi.is_finite() && t_hi > t_lo) {
        return Err(ExperimentError::InvalidConfig(format!(
            "degenerate fit window [{t_lo}, {t_hi}], cutoff {cutoff}"
        )));
    }
    let in_window = ranked.iter().filter(|&&c| c > t_lo && c <= t_hi).count() as u64;
    if in_window < MIN_IN_WINDOW {
        return Err(ExperimentError::TooFewInWindow {
            got: in_window,
            need: MIN_IN_WINDOW,
        });
    }

    let mut result = ExperimentResult::new(config);
    let nonempty = caps.iter().filter(|c| c.exceeds(0.0)).count() as u64;
    result
        .rows
        .push(EstimateRow::new("nonempty", 0.0, nonempty, n).with_reference(0.5));
    let k = config.tail_points;
    let ratio = (t_hi / t_lo).ln() / (k - 1) as f64;
    let grid: Vec<f64> = (0..k).map(|i| t_lo * (ratio * i as f64).exp()).collect();
    let mut points = Vec::new();
    let mut exact = Vec::new();
    for &t in &grid {
        let count = caps.iter().filter(|c| c.exceeds(t)).count() as u64;
        let reference = cable_capacity_survival(t, g00);
        let row = EstimateRow::new("survival", t, count, n).with_reference(reference);
        points.push((t, row.estimate, super::binomial_sigma(row.estimate, n)));
        exact.push((t, reference, super::binomial_sigma(reference, n)));
        result.rows.push(row);
    }
    let (slope, stderr) = fit_loglog(&points)?;
    let (window_reference, _) = fit_loglog(&exact)?;
    result.fits.push(SlopeFit {
        series: "survival".into(),
        slope,
        stderr,
        reference: -0.5,
        tolerance: config.tolerance,
        window_reference: Some(window_reference),
    });
    result.checks.push(Check::new(
        "tail slope",
        (slope + 0.5).abs() <= config.tolerance,
        format!(
            "slope {slope:.4} ± {stderr:.4} over [{t_lo:.3}, {t_hi:.3}], exact law {window_reference:.4}"
        ),
    ));
    result.check_within("nonempty within 3 sigma", "nonempty", 0.0);
    let monotone = result
        .series("survival")
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1].count <= w[0].count);
    result
        .checks
        .push(Check::new("survival nonincreasing", monotone, String::new()));
    result.checks.push(Check::new(
        "window below cutoff",
        t_hi < cutoff,
        format!("95th percentile {t_hi:.3}, cutoff {cutoff:.3}"),
    ));
    Ok(result)
}
