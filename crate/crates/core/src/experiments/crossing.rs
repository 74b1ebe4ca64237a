use crate::graph::{build_from_edge_list, refine};
use crate::sampler::{crossing_probability, GffSampler, SampleId};

use super::{run_indexed, Check, EstimateRow, ExperimentConfig, ExperimentError, ExperimentResult};

/// Oracle for the cable crossing rule: the field on a single edge refined
/// into `m` pieces, conditioned on its endpoint values, stays strictly
/// positive at every refined vertex with a frequency that tends to the
/// closed-form crossing probability as `m` grows.
pub fn run_crossing_oracle(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let (p, q) = config.endpoint_values;
    let weight = config.edge_weight;
    // killing sits on the fixed endpoints and does not affect the interior
    let edge = build_from_edge_list(&[(0, 1, weight)], &[(0, 1.0), (1, 1.0)])?;
    let reference = crossing_probability(weight, p, q);
    let mut result = ExperimentResult::new(config);
    for &m in &config.refinements {
        let (fine, _) = refine(&edge, m)?;
        let sampler = GffSampler::with_fixed(&fine, &[0, 1])?;
        let positive = run_indexed(config.threads, config.samples, |index| {
            let phi = sampler.draw(SampleId { master: config.seed, index }, &[p, q])?;
            Ok(phi.iter().all(|&v| v > 0.0))
        })?;
        let count = positive.iter().filter(|&&b| b).count() as u64;
        let row = EstimateRow::new("refined", m as f64, count, config.samples).with_reference(reference);
        let diff = row.estimate - reference;
        result.checks.push(Check::new(
            format!("m={m} within {}", config.tolerance),
            diff.abs() <= config.tolerance,
            format!("frequency {:.5}, closed form {reference:.5}, diff {diff:+.5}", row.estimate),
        ));
        result.rows.push(row);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ExperimentKind, GraphSpec};

    #[test]
    fn discrete_bias_shrinks_with_refinement() {
        let mut config = ExperimentConfig::new(ExperimentKind::Crossing, GraphSpec::P2Killed, 40_000, 5);
        config.refinements = vec![64, 1024];
        let result = run_crossing_oracle(&config).unwrap();
        let diffs: Vec<f64> = result
            .series("refined")
            .map(|r| (r.estimate - r.reference.unwrap()).abs())
            .collect();
        assert!(diffs[1] < diffs[0] / 2.5, "{diffs:?}");
    }
}
