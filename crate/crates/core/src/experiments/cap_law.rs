use std::f64::consts::PI;

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::closed_forms::{cap_support_edge, cap_transform_mass};
use crate::graph::doob_transform;
use crate::potential::green;
use crate::sampler::{cable_capacity_green, cable_cluster, GffSampler, SampleId};

use super::{
    base_vertex, run_indexed, Check, EstimateRow, ExperimentConfig, ExperimentError,
    ExperimentResult,
};

/// Capacity law of the cable cluster of the base at level `−t` on the graph
/// conditioned to hit the target.
///
/// Capacities are binned with equal mass under the `t = 0` law. Each level
/// also reports the empty, finite and unbounded cluster frequencies.
pub fn run_cap_law(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let g = config.graph.build()?;
    let base = base_vertex(config, &g)?;
    let x = config
        .target
        .ok_or_else(|| ExperimentError::InvalidConfig("cap-law needs a target".into()))?;
    let doob = doob_transform(&g, x, base)?;
    let gh = &doob.graph;
    let bh = doob.embedding.new_of(base).expect("base survives the transform");
    let h0 = doob.h[base];
    let killed_at_x = green(&g, &[x])?.get(base, base);
    let beta = cap_support_edge(killed_at_x, h0);
    let green_h = green(gh, &[])?;
    let var_h = green_h.get(bh, bh);

    let mut result = ExperimentResult::new(config);
    let consistency = (var_h - killed_at_x / (h0 * h0)).abs() / var_h;
    result.checks.push(Check::new(
        "transformed green at base",
        consistency < 1e-9,
        format!("relative residual {consistency:.2e}"),
    ));
    let total = cap_transform_mass(beta, f64::INFINITY, 0.0, killed_at_x, h0);
    result.checks.push(Check::new(
        "total finite mass at t = 0",
        (total - 0.5).abs() < 1e-6,
        format!("{total:.12}"),
    ));

    // equal-mass edges under the t = 0 law, u = β sec²θ with θ uniform
    let bins = config.bins;
    let mut edges: Vec<f64> = (0..bins)
        .map(|k| beta / (PI * k as f64 / (2.0 * bins as f64)).cos().powi(2))
        .collect();
    edges.push(f64::INFINITY);

    let sampler = GffSampler::new(gh)?;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut finite_freq = Vec::new();
    for (li, &t) in config.levels.iter().enumerate() {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(ExperimentError::InvalidConfig(format!("level {t} must be >= 0")));
        }
        // -1 marks an empty cluster
        let caps = run_indexed(config.threads, config.samples, |index| {
            let sample = sampler.sample(-t, SampleId { master: config.seed, index }, &[])?;
            let cluster = cable_cluster(gh, &sample, bh);
            if cluster.is_empty() {
                return Ok(-1.0);
            }
            Ok(cable_capacity_green(&cluster, &green_h)?)
        })?;
        let n = config.samples;
        let series = format!("t={t:?}");
        let mut observed = Vec::new();
        let mut expected = Vec::new();
        for w in edges.windows(2) {
            let count = caps.iter().filter(|&&c| c >= w[0] && c < w[1]).count() as u64;
            let mass = cap_transform_mass(w[0], w[1], t, killed_at_x, h0);
            result
                .rows
                .push(EstimateRow::new(series.as_str(), w[0], count, n).with_reference(mass));
            observed.push(count as f64);
            expected.push(mass * n as f64);
        }
        let empty = caps.iter().filter(|&&c| c < 0.0).count() as u64;
        let unbounded = caps.iter().filter(|c| c.is_infinite()).count() as u64;
        let finite = n - empty - unbounded;
        let p_empty = std_normal.cdf(-t / var_h.sqrt());
        let p_finite = cap_transform_mass(beta, f64::INFINITY, t, killed_at_x, h0);
        let p_unbounded = (1.0 - p_empty - p_finite).max(0.0);
        result
            .rows
            .push(EstimateRow::new("empty", t, empty, n).with_reference(p_empty));
        result
            .rows
            .push(EstimateRow::new("finite", t, finite, n).with_reference(p_finite));
        result
            .rows
            .push(EstimateRow::new("unbounded", t, unbounded, n).with_reference(p_unbounded));
        observed.extend([empty as f64, unbounded as f64]);
        expected.extend([p_empty * n as f64, p_unbounded * n as f64]);
        finite_freq.push((t, finite));

        let below = caps
            .iter()
            .filter(|&&c| c >= 0.0 && c < beta * (1.0 - 1e-9))
            .count();
        result.checks.push(Check::new(
            format!("t={t:?} nothing below the support edge"),
            below == 0,
            format!("{below} capacities below {beta:.6}"),
        ));
        let mut stat = 0.0;
        let mut cells = 0usize;
        let mut impossible = 0.0;
        for (o, e) in observed.iter().zip(&expected) {
            if *e > 1e-9 {
                stat += (o - e).powi(2) / e;
                cells += 1;
            } else {
                impossible += o;
            }
        }
        let p_value = if cells >= 2 && impossible == 0.0 {
            1.0 - ChiSquared::new((cells - 1) as f64)
                .expect("positive degrees of freedom")
                .cdf(stat)
        } else {
            0.0
        };
        let detail = format!("chi2 = {stat:.3} on {} dof, p = {p_value:.4}", cells.saturating_sub(1));
        if li == 0 {
            result
                .checks
                .push(Check::new(format!("t={t:?} chi-square p > 0.01"), p_value > 0.01, detail));
        } else {
            log::info!("cap-law t={t}: {detail}");
        }
    }
    if finite_freq.len() > 1 {
        let mut sorted = finite_freq.clone();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let decreasing = sorted.windows(2).all(|w| w[1].1 <= w[0].1);
        let detail = sorted
            .iter()
            .map(|(t, c)| format!("t={t}: {c}"))
            .collect::<Vec<_>>()
            .join(", ");
        result.checks.push(Check::new(
            "finite clusters become rarer as t grows",
            decreasing,
            detail,
        ));
    }
    Ok(result)
}
