use crate::closed_forms::lupu_arctan;
use crate::graph::refine;
use crate::sampler::{
    cable_cluster, cable_green_gap, cluster_of, green_gap, GapContext, GffSampler, SampleId,
};

use super::{
    base_vertex, run_indexed, Check, EstimateRow, ExperimentConfig, ExperimentError,
    ExperimentResult,
};

/// Survival of the gap `g_{0}(x) − g_{K⁰}(x)` on a grid of thresholds,
/// with `K⁰` the vertex cluster on each refinement of the graph, and
/// optionally the cable cluster of the unrefined graph.
pub fn run_green_gap_cdf(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let g = config.graph.build()?;
    let base = base_vertex(config, &g)?;
    let x = config
        .target
        .ok_or_else(|| ExperimentError::InvalidConfig("green-gap needs a target".into()))?;
    if x >= g.vertex_count() || x == base {
        return Err(ExperimentError::InvalidConfig(format!("bad target {x}")));
    }
    let ctx = GapContext::new(&g, base, x)?;
    let largest = ctx.killed_at_base;
    let thresholds: Vec<f64> = config.t_fractions.iter().map(|f| f * largest).collect();
    if let Some(t) = thresholds.iter().find(|&&t| !(t > 0.0 && t <= largest)) {
        return Err(ExperimentError::InvalidConfig(format!(
            "threshold {t} outside (0, {largest}]"
        )));
    }
    let g00 = ctx.green.get(base, base);
    let g0x = ctx.green.get(base, x);
    let references = thresholds
        .iter()
        .map(|&t| lupu_arctan(g00, g0x, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut result = ExperimentResult::new(config);
    let push_series = |result: &mut ExperimentResult, name: &str, gaps: &[f64]| {
        for (&t, &p) in thresholds.iter().zip(&references) {
            let count = gaps.iter().filter(|&&gap| gap >= t).count() as u64;
            result
                .rows
                .push(EstimateRow::new(name, t, count, config.samples).with_reference(p));
        }
    };

    let mut excesses = Vec::new();
    for &m in &config.refinements {
        let (fine, embedding) = refine(&g, m)?;
        let (fb, fx) = (
            embedding.new_of(base).expect("refinement keeps vertices"),
            embedding.new_of(x).expect("refinement keeps vertices"),
        );
        let fine_ctx = GapContext::new(&fine, fb, fx)?;
        let sampler = GffSampler::new(&fine)?;
        let gaps = run_indexed(config.threads, config.samples, |index| {
            let sample = sampler.sample(0.0, SampleId { master: config.seed, index }, &[])?;
            Ok(green_gap(&fine, &fine_ctx, &cluster_of(&fine, &sample, fb))?)
        })?;
        let name = format!("m={m}");
        push_series(&mut result, &name, &gaps);
        let worst = result
            .series(&name)
            .filter_map(EstimateRow::excess)
            .fold(0.0, f64::max);
        if m >= config.assert_from {
            result.check_within(&format!("{name} within 3 sigma + slack"), &name, config.slack);
        } else {
            log::info!("gap series {name}: largest excess over 3 sigma {worst:.5}");
        }
        excesses.push((m, worst));
    }
    if excesses.len() > 1 {
        let shrinking = excesses.windows(2).all(|w| w[1].1 <= w[0].1);
        let detail = excesses
            .iter()
            .map(|(m, e)| format!("m={m}: {e:.5}"))
            .collect::<Vec<_>>()
            .join(", ");
        result
            .checks
            .push(Check::new("slack shrinks with refinement", shrinking, detail));
    }

    if config.cable_series {
        let sampler = GffSampler::new(&g)?;
        let gaps = run_indexed(config.threads, config.samples, |index| {
            let sample = sampler.sample(0.0, SampleId { master: config.seed, index }, &[])?;
            Ok(cable_green_gap(&ctx, &cable_cluster(&g, &sample, base))?)
        })?;
        push_series(&mut result, "cable", &gaps);
        result.check_within("cable within 3 sigma", "cable", 0.0);
    }
    Ok(result)
}
