//! Level-set clusters on the cable system: the vertex cluster plus the
//! partial cables ("stubs") through which the cluster leaves its vertices,
//! and capacities of the resulting compact sets.

use crate::graph::{Vertex, WeightedGraph};
use faer::linalg::solvers::Solve;
use faer::{Col, Mat, Side};

use crate::linalg::{conjugate_gradient, CgSettings, LinalgError};
use crate::potential::GreenMatrix;
use crate::rng::stub_rng;

use super::bridge::{bridge_hit, first_hit_fraction, BridgeHit};
use super::{cluster_of, ClusterAtLevel, FieldSample, SamplerError};

/// Far end of a cable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StubEnd {
    Vertex(Vertex),
    /// The killing cable of the inner vertex.
    Cemetery,
}

/// Piece `[inside, point]` of the cable from `inside` to `outside`, where the
/// point sits at `fraction` of the cable length from `inside`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stub {
    pub inside: Vertex,
    pub outside: StubEnd,
    pub fraction: f64,
    /// Conductance of the whole cable.
    pub conductance: f64,
}

/// A point of the cable system: `from` with `position` 0, `to` with 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CablePoint {
    pub from: Vertex,
    pub to: StubEnd,
    pub position: f64,
    pub conductance: f64,
}

impl CablePoint {
    pub fn vertex(v: Vertex) -> Self {
        Self {
            from: v,
            to: StubEnd::Vertex(v),
            position: 0.0,
            conductance: 1.0,
        }
    }

    fn same_cable(&self, other: &Self) -> bool {
        self.position > 0.0
            && other.position > 0.0
            && ((self.from == other.from && self.to == other.to)
                || (StubEnd::Vertex(self.from) == other.to && self.to == StubEnd::Vertex(other.from)))
    }

    /// Position measured from the endpoint `from` of `reference`.
    fn position_along(&self, reference: &Self) -> f64 {
        if self.from == reference.from {
            self.position
        } else {
            1.0 - self.position
        }
    }

    /// Green covariance with another point given vertex values `g(·,·)`.
    pub fn covariance(&self, other: &Self, g: &impl Fn(Vertex, Vertex) -> f64) -> f64 {
        let mut total = 0.0;
        let (s, t) = (self.position, other.position);
        let ends_a = [(Some(self.from), 1.0 - s), (end_vertex(self.to), s)];
        let ends_b = [(Some(other.from), 1.0 - t), (end_vertex(other.to), t)];
        for &(a, wa) in &ends_a {
            let Some(a) = a else { continue };
            if wa == 0.0 {
                continue;
            }
            for &(b, wb) in &ends_b {
                let Some(b) = b else { continue };
                if wb == 0.0 {
                    continue;
                }
                total += wa * wb * g(a, b);
            }
        }
        if self.same_cable(other) {
            let a = self.position;
            let b = other.position_along(self);
            total += a.min(b) * (1.0 - a.max(b)) / self.conductance;
        }
        total
    }
}

fn end_vertex(end: StubEnd) -> Option<Vertex> {
    match end {
        StubEnd::Vertex(v) => Some(v),
        StubEnd::Cemetery => None,
    }
}

/// Cluster of the base point on the cable system at the sample's level.
#[derive(Debug, Clone, PartialEq)]
pub struct CableCluster {
    pub vertices: ClusterAtLevel,
    pub stubs: Vec<Stub>,
    /// False when the cluster runs into a killing cable without meeting the
    /// level, which makes it unbounded with infinite capacity.
    pub compact: bool,
}

impl CableCluster {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub(crate) fn boundary_points(&self) -> Vec<CablePoint> {
        self.stubs
            .iter()
            .map(|s| CablePoint {
                from: s.inside,
                to: s.outside,
                position: s.fraction,
                conductance: s.conductance,
            })
            .collect()
    }
}

/// Builds the cable cluster of `base`. Stub positions come from per-cable
/// random streams, so they do not depend on the exploration order.
pub fn cable_cluster(g: &WeightedGraph, sample: &FieldSample, base: Vertex) -> CableCluster {
    let vertices = cluster_of(g, sample, base);
    let mut cluster = CableCluster {
        vertices,
        stubs: Vec::new(),
        compact: true,
    };
    if cluster.is_empty() {
        return cluster;
    }
    let level = sample.level;
    let phi = &sample.phi;
    let id = sample.id;
    let members = cluster.vertices.vertices.clone();
    let inside = |v: Vertex| members.binary_search(&v).is_ok();
    let edges = g.edge_count();
    for &y in &members {
        let p = phi[y] - level;
        for &(z, e) in g.neighbors(y) {
            if sample.open[e] {
                continue;
            }
            let edge = g.edge(e);
            let lambda = edge.weight;
            let q = phi[z] - level;
            let direction = usize::from(edge.u != y);
            if inside(z) {
                // closed cable between two cluster vertices: the u side meets
                // the level first, then the rest runs from the level to z
                if direction == 1 {
                    continue;
                }
                let mut rng = stub_rng(id.master, id.index, 2 * e);
                let first = first_hit_fraction(p, -q.abs(), 1.0 / lambda, &mut rng);
                let rest = 1.0 - first;
                let mut rng = stub_rng(id.master, id.index, 2 * e + 1);
                let back = first_hit_fraction(q, 0.0, rest / lambda, &mut rng) * rest;
                cluster.stubs.push(Stub {
                    inside: y,
                    outside: StubEnd::Vertex(z),
                    fraction: first,
                    conductance: lambda,
                });
                cluster.stubs.push(Stub {
                    inside: z,
                    outside: StubEnd::Vertex(y),
                    fraction: back,
                    conductance: lambda,
                });
            } else {
                let mut rng = stub_rng(id.master, id.index, 2 * e + direction);
                let fraction = first_hit_fraction(p, -q.abs(), 1.0 / lambda, &mut rng);
                cluster.stubs.push(Stub {
                    inside: y,
                    outside: StubEnd::Vertex(z),
                    fraction,
                    conductance: lambda,
                });
            }
        }
        let kappa = g.killing(y);
        if kappa > 0.0 {
            let mut rng = stub_rng(id.master, id.index, 2 * edges + y);
            match bridge_hit(p, -level, 1.0 / kappa, &mut rng) {
                BridgeHit::At(fraction) => cluster.stubs.push(Stub {
                    inside: y,
                    outside: StubEnd::Cemetery,
                    fraction,
                    conductance: kappa,
                }),
                BridgeHit::Never => cluster.compact = false,
            }
        }
    }
    cluster
}

/// `1ᵀ M⁻¹ 1` for the Green matrix of a point set: the capacity of the set.
pub(crate) fn capacity_of_points(
    points: &[CablePoint],
    g: &impl Fn(Vertex, Vertex) -> f64,
) -> Result<f64, SamplerError> {
    if points.is_empty() {
        return Ok(0.0);
    }
    let n = points.len();
    let mut m = Mat::<f64>::zeros(n, n);
    for j in 0..n {
        for i in j..n {
            m[(i, j)] = points[i].covariance(&points[j], g);
        }
    }
    let factor = m
        .llt(Side::Lower)
        .map_err(|_| LinalgError::NotPositiveDefinite { pivot: 0, value: f64::NAN })?;
    let x = factor.solve(Col::<f64>::ones(n));
    Ok(x.iter().sum())
}

/// Capacity of a cable cluster from the Green function of the graph:
/// `1ᵀ G_BB⁻¹ 1` over the stub endpoints `B`. Infinite when not compact.
pub fn cable_capacity_green(
    cluster: &CableCluster,
    green: &GreenMatrix,
) -> Result<f64, SamplerError> {
    if !cluster.compact {
        return Ok(f64::INFINITY);
    }
    capacity_of_points(&cluster.boundary_points(), &|a, b| green.get(a, b))
}

/// Capacity of a cable cluster as the conductance between the cluster and
/// the cemetery: the remaining piece of a stub from its endpoint to `z` has
/// conductance `λ/(1 − f)`, and the exterior potential is harmonic.
pub fn cable_capacity_dirichlet(
    g: &WeightedGraph,
    cluster: &CableCluster,
) -> Result<f64, SamplerError> {
    if !cluster.compact {
        return Ok(f64::INFINITY);
    }
    if cluster.is_empty() {
        return Ok(0.0);
    }
    let n = g.vertex_count();
    let members = &cluster.vertices.vertices;
    let mut in_cluster = vec![false; n];
    for &v in members {
        in_cluster[v] = true;
    }
    let outside: Vec<Vertex> = (0..n).filter(|&v| !in_cluster[v]).collect();
    let mut position = vec![usize::MAX; n];
    for (i, &v) in outside.iter().enumerate() {
        position[v] = i;
    }
    let m = outside.len();
    let mut diagonal: Vec<f64> = outside.iter().map(|&v| g.total_weight(v)).collect();
    let mut rhs = vec![0.0; m];
    let mut direct = 0.0;
    let mut links = Vec::new();
    for s in &cluster.stubs {
        let stretched = s.conductance / (1.0 - s.fraction);
        match s.outside {
            StubEnd::Cemetery => direct += stretched,
            StubEnd::Vertex(z) if !in_cluster[z] => {
                let i = position[z];
                diagonal[i] += stretched - s.conductance;
                rhs[i] += stretched;
                links.push((i, stretched));
            }
            // both ends held at potential one
            StubEnd::Vertex(_) => {}
        }
    }
    if m == 0 {
        return Ok(direct);
    }
    let mut u = vec![0.0; m];
    conjugate_gradient(
        |x, out| {
            for (i, &y) in outside.iter().enumerate() {
                let mut acc = diagonal[i] * x[i];
                for &(z, e) in g.neighbors(y) {
                    if !in_cluster[z] {
                        acc -= g.edge(e).weight * x[position[z]];
                    }
                }
                out[i] = acc;
            }
        },
        |r, out| {
            for ((o, r), d) in out.iter_mut().zip(r).zip(&diagonal) {
                *o = r / d;
            }
        },
        &rhs,
        &mut u,
        CgSettings {
            tolerance: 1e-13,
            ..CgSettings::default()
        },
    )?;
    Ok(direct + links.iter().map(|&(i, c)| c * (1.0 - u[i])).sum::<f64>())
}
