use std::collections::VecDeque;

use crate::closed_forms::exponent_references;
use crate::graph::{
    graph_distances, resolve_region, scaled_radius, RegionKind, Vertex, WeightedGraph,
};
use crate::linalg::Window;
use crate::rng::EdgeUniforms;
use crate::sampler::{cable_open, cluster_of, BoxCapacity, CapacityValue, GffSampler, SampleId};

use super::{
    base_vertex, fit_loglog, run_indexed, Check, EstimateRow, ExperimentConfig, ExperimentError,
    ExperimentResult, SlopeFit,
};

/// Ball of radius `radius` around the base as a local graph on the window
/// that holds it.
struct LocalBall {
    /// Window index of each ball vertex.
    cell: Vec<usize>,
    distance: Vec<usize>,
    /// `(local neighbour, global edge id, conductance)`.
    adjacency: Vec<Vec<(usize, usize, f64)>>,
    root: usize,
}

impl LocalBall {
    fn new(g: &WeightedGraph, base: Vertex, radius: usize, window: &Window) -> Self {
        let geo = g.lattice().expect("lattice box");
        let dist = graph_distances(g, base);
        let mut local = std::collections::HashMap::new();
        let mut members = Vec::new();
        let mut queue = VecDeque::from([base]);
        local.insert(base, 0usize);
        members.push(base);
        while let Some(x) = queue.pop_front() {
            for &(y, _) in g.neighbors(x) {
                if dist[y] <= radius && !local.contains_key(&y) {
                    local.insert(y, members.len());
                    members.push(y);
                    queue.push_back(y);
                }
            }
        }
        let cell = members
            .iter()
            .map(|&v| window.local_index(&geo.coords(v)).expect("ball inside window"))
            .collect();
        let adjacency = members
            .iter()
            .map(|&x| {
                g.neighbors(x)
                    .iter()
                    .filter_map(|&(y, e)| local.get(&y).map(|&j| (j, e, g.edge(e).weight)))
                    .collect()
            })
            .collect();
        Self {
            cell,
            distance: members.iter().map(|&v| dist[v]).collect(),
            adjacency,
            root: 0,
        }
    }

    /// Largest distance from the base reached by its level-0 cluster inside
    /// the ball, or `None` for an empty cluster.
    fn reach(&self, phi_window: &[f64], id: SampleId) -> Option<usize> {
        let phi = |i: usize| phi_window[self.cell[i]];
        if phi(self.root) < 0.0 {
            return None;
        }
        let radius = *self.distance.iter().max().unwrap_or(&0);
        let mut uniforms = EdgeUniforms::new(id.master, id.index);
        let mut seen = vec![false; self.cell.len()];
        seen[self.root] = true;
        let mut queue = VecDeque::from([self.root]);
        let mut best = 0;
        while let Some(i) = queue.pop_front() {
            best = best.max(self.distance[i]);
            if best == radius {
                break;
            }
            for &(j, e, w) in &self.adjacency[i] {
                if seen[j] || phi(j) < 0.0 {
                    continue;
                }
                if cable_open(w, phi(i), phi(j), 0.0, uniforms.get(e)) {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        Some(best)
    }
}

/// `ψ̂(R)`: frequency with which the level-0 cluster of the box center
/// reaches graph distance `R`, and the slope of `log ψ̂` in `log R`.
pub fn run_one_arm(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let g = config.graph.build()?;
    let geo = *g
        .lattice()
        .ok_or_else(|| ExperimentError::InvalidConfig("one-arm needs a lattice box".into()))?;
    let base = base_vertex(config, &g)?;
    let mut radii = config.radii.clone();
    radii.sort_unstable();
    radii.dedup();
    let rmax = *radii
        .last()
        .ok_or_else(|| ExperimentError::InvalidConfig("no radii".into()))?;
    if 4 * rmax > geo.side {
        return Err(ExperimentError::InvalidConfig(format!(
            "radius {rmax} exceeds side/4 = {}",
            geo.side / 4
        )));
    }
    let refs = exponent_references(config.alpha.unwrap_or(geo.dimension as f64))?;
    let window = Window::around(&geo, &geo.coords(base), rmax);
    let ball = LocalBall::new(&g, base, rmax, &window);
    let sampler = GffSampler::new(&g)?;
    let reaches = run_indexed(config.threads, config.samples, |index| {
        let id = SampleId { master: config.seed, index };
        let phi = sampler.draw_window(id, &window).expect("spectral sampler");
        Ok(ball.reach(&phi, id))
    })?;
    let n = config.samples;
    let mut result = ExperimentResult::new(config);
    let nonempty = reaches.iter().filter(|r| r.is_some()).count() as u64;
    result
        .rows
        .push(EstimateRow::new("nonempty", 0.0, nonempty, n).with_reference(0.5));
    let mut points = Vec::new();
    for &r in radii.iter().filter(|&&r| r > 0) {
        let count = reaches.iter().filter(|x| x.is_some_and(|d| d >= r)).count() as u64;
        let row = EstimateRow::new("one-arm", r as f64, count, n);
        points.push((r as f64, row.estimate, super::binomial_sigma(row.estimate, n)));
        result.rows.push(row);
    }
    let (slope, stderr) = fit_loglog(&points)?;
    let target = refs.one_arm_exponent;
    result.fits.push(SlopeFit {
        series: "one-arm".into(),
        slope,
        stderr,
        reference: target,
        tolerance: config.tolerance,
        window_reference: None,
    });
    result.checks.push(Check::new(
        "one-arm slope",
        (slope - target).abs() <= config.tolerance,
        format!("slope {slope:.4} ± {stderr:.4}, reference {target}"),
    ));
    result.check_within("nonempty within 3 sigma", "nonempty", 0.0);
    let counts: Vec<u64> = result.series("one-arm").map(|r| r.count).collect();
    result.checks.push(Check::new(
        "one-arm nonincreasing in R",
        counts.windows(2).all(|w| w[1] <= w[0]) && counts.first().is_none_or(|&c| c <= nonempty),
        format!("{counts:?}"),
    ));
    Ok(result)
}

/// Joint frequency of `0 ↔ ∂B(R)` and `cap(K⁰ ∩ A) ≤ s ((b − a) R)^ν` for
/// the annulus `A = B((1−a)R) \ B̄((1−b)R)`, against the arm frequency.
pub fn run_annulus_joint(config: &ExperimentConfig) -> Result<ExperimentResult, ExperimentError> {
    let g = config.graph.build()?;
    let geo = *g.lattice().ok_or_else(|| {
        ExperimentError::InvalidConfig("annulus-joint needs a lattice box".into())
    })?;
    let base = base_vertex(config, &g)?;
    let nu = exponent_references(config.alpha.unwrap_or(geo.dimension as f64))?.nu;
    let (a, b) = (config.annulus_inner, config.annulus_outer);
    let dist = graph_distances(&g, base);
    let boxcap = BoxCapacity::new(&g, config.screen_size).expect("lattice box");
    let sampler = GffSampler::new(&g)?;
    let mut result = ExperimentResult::new(config);
    let n = config.samples;
    let mut s_grid = config.s_grid.clone();
    s_grid.sort_by(f64::total_cmp);
    for &radius in &config.radii {
        let annulus = resolve_region(
            &g,
            RegionKind::Annulus {
                center: base,
                radius,
                inner: a,
                outer: b,
            },
        )?;
        let hole_radius = scaled_radius(radius, 1.0 - b);
        let ball = resolve_region(&g, RegionKind::Ball { center: base, radius: hole_radius })?;
        let surrounded = resolve_region(
            &g,
            RegionKind::SurroundedBall {
                center: base,
                radius: hole_radius,
            },
        )?;
        result.checks.push(Check::new(
            format!("R={radius} surrounded ball equals ball"),
            ball.members == surrounded.members,
            format!("{} vs {} vertices", ball.len(), surrounded.len()),
        ));
        let scale = ((b - a) * radius as f64).powf(nu);
        let cutoff = s_grid
            .iter()
            .copied()
            .filter(|s| s.is_finite())
            .fold(0.0, f64::max)
            * scale;
        let records = run_indexed(config.threads, n, |index| {
            let sample = sampler.sample(0.0, SampleId { master: config.seed, index }, &[])?;
            let cluster = cluster_of(&g, &sample, base);
            if !cluster.vertices.iter().any(|&v| dist[v] >= radius) {
                return Ok(None);
            }
            let inside: Vec<Vertex> = cluster
                .vertices
                .iter()
                .copied()
                .filter(|&v| annulus.contains(v))
                .collect();
            Ok(Some(boxcap.vertex_capacity(&g, &inside, Some(cutoff))?))
        })?;
        let arms = records.iter().filter(|r| r.is_some()).count() as u64;
        let series = format!("R={radius}");
        result
            .rows
            .push(EstimateRow::new("arm", radius as f64, arms, n));
        let mut counts = Vec::new();
        for &s in &s_grid {
            let threshold = s * scale;
            let count = records
                .iter()
                .flatten()
                .filter(|c| {
                    threshold.is_infinite() || matches!(c.at_most(threshold), Some(true))
                })
                .count() as u64;
            result
                .rows
                .push(EstimateRow::new(series.as_str(), s, count, n));
            counts.push((s, count));
        }
        result.checks.push(Check::new(
            format!("R={radius} joint nondecreasing in s"),
            counts.windows(2).all(|w| w[0].1 <= w[1].1),
            format!("{counts:?}"),
        ));
        result.checks.push(Check::new(
            format!("R={radius} joint below arm"),
            counts.iter().all(|&(_, c)| c <= arms),
            format!("arm count {arms}"),
        ));
        if let Some(&(_, c)) = counts.iter().find(|(s, _)| *s == 0.0) {
            result
                .checks
                .push(Check::new(format!("R={radius} joint vanishes at s = 0"), c == 0, format!("{c}")));
        }
        if let Some(&(_, c)) = counts.iter().find(|(s, _)| s.is_infinite()) {
            result.checks.push(Check::new(
                format!("R={radius} joint recovers arm as s grows"),
                c == arms,
                format!("{c} vs {arms}"),
            ));
        }
        let censored = records
            .iter()
            .flatten()
            .filter(|c| matches!(c, CapacityValue::AtLeast(_)))
            .count();
        log::info!("annulus R={radius}: {arms} arms, {censored} capacities above {cutoff:.3}");
    }
    Ok(result)
}
