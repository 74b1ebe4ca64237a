use crate::closed_forms::two_point;
use crate::graph::Vertex;
use crate::sampler::{cluster_of, GffSampler, SampleId};

use super::{
    base_vertex, run_indexed, EstimateRow, ExperimentConfig, ExperimentError, ExperimentResult,
    GreenSource,
};

/// Frequency of `x ∈ cluster(base)` at level 0 for each target `x`. The base
/// itself is always the first target and measures `P(cluster ≠ ∅)`.
pub fn run_two_point(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let g = config.graph.build()?;
    let base = base_vertex(config, &g)?;
    let mut targets: Vec<Vertex> = vec![base];
    for off in &config.offsets {
        let geo = g.lattice().ok_or_else(|| {
            ExperimentError::InvalidConfig("offsets need a lattice box".into())
        })?;
        let v = geo.offset(base, off).ok_or_else(|| {
            ExperimentError::InvalidConfig(format!("offset {off:?} leaves the box"))
        })?;
        targets.push(v);
    }
    targets.extend(&config.targets);
    if let Some(&v) = targets.iter().find(|&&v| v >= g.vertex_count()) {
        return Err(ExperimentError::InvalidConfig(format!("target {v} out of range")));
    }
    if targets.len() > 64 {
        return Err(ExperimentError::InvalidConfig("at most 63 targets".into()));
    }
    let green = GreenSource::new(&g)?;
    let sampler = GffSampler::new(&g)?;
    let hits = run_indexed(config.threads, config.samples, |index| {
        let sample = sampler.sample(0.0, SampleId { master: config.seed, index }, &[])?;
        let cluster = cluster_of(&g, &sample, base);
        let mut mask = 0u64;
        for (k, &x) in targets.iter().enumerate() {
            if cluster.contains(x) {
                mask |= 1 << k;
            }
        }
        Ok(mask)
    })?;
    let mut result = ExperimentResult::new(config);
    let g00 = green.get(base, base);
    for (k, &x) in targets.iter().enumerate() {
        let count = hits.iter().filter(|&&m| m >> k & 1 == 1).count() as u64;
        let reference = two_point(g00, green.get(x, x), green.get(base, x))?;
        result
            .rows
            .push(EstimateRow::new("two-point", x as f64, count, config.samples).with_reference(reference));
    }
    result.check_within("two-point within 3 sigma", "two-point", 0.0);
    Ok(result)
}
