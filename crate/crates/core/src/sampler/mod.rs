//! Gaussian free field sampling, the cable crossing rule, level-set
//! clusters and cluster observables.

mod bridge;
mod box_capacity;
mod cable;
mod dump;
mod gap;

use std::collections::VecDeque;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::graph::{Vertex, WeightedGraph};
use crate::linalg::{cached_solver, BoxSpectral, LaplacianSolver, LinalgError, Window};
use crate::potential::{dirichlet, PotentialError};
use crate::rng::{sample_stream, EdgeUniforms, Stream};

pub use bridge::{bridge_hit, first_hit_fraction, inverse_gaussian, BridgeHit};
pub use box_capacity::{BoxCapacity, CapacityValue};
pub use cable::{
    cable_capacity_dirichlet, cable_capacity_green, cable_cluster, CableCluster, Stub,
    StubEnd,
};
pub use dump::{read_dump, DumpHeader, DumpWriter, DUMP_MAGIC, DUMP_VERSION};
pub use gap::{cable_green_gap, green_gap, GapContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("expected {expected} boundary values, got {got}")]
    BoundaryValues { expected: usize, got: usize },
    #[error("green gap is defined at level 0 only, got level {0}")]
    NonzeroLevel(f64),
    #[error("vertex {0} out of range")]
    VertexOutOfRange(Vertex),
    #[error("dump format: {0}")]
    Dump(String),
}

/// Provenance of one sample: master seed and sample index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SampleId {
    pub master: u64,
    pub index: u64,
}

/// One realization of the field at vertices with the cable crossing
/// indicators at `level`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub level: f64,
    pub phi: Vec<f64>,
    /// Per edge: the cable stays at or above `level` between its endpoints.
    pub open: Vec<bool>,
    pub id: SampleId,
}

/// Cluster of the base point in the cable level set, seen on vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAtLevel {
    pub base: Vertex,
    pub level: f64,
    /// Sorted member vertices; empty when the base is below the level.
    pub vertices: Vec<Vertex>,
    /// Sorted ids of open edges inside the cluster.
    pub open_edges: Vec<usize>,
}

impl ClusterAtLevel {
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn contains(&self, v: Vertex) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }
}

/// Probability that a cable of conductance `weight` whose endpoints sit at
/// heights `p` and `q` above the level stays above it throughout.
pub fn crossing_probability(weight: f64, p: f64, q: f64) -> f64 {
    if p <= 0.0 || q <= 0.0 {
        return 0.0;
    }
    -(-2.0 * weight * p * q).exp_m1()
}

/// Crossing decision from a shared uniform, monotone in the level.
pub fn cable_open(weight: f64, phi_x: f64, phi_y: f64, level: f64, uniform: f64) -> bool {
    uniform < crossing_probability(weight, phi_x - level, phi_y - level)
}

enum Backend {
    Factor(Arc<LaplacianSolver>),
    Spectral(Arc<BoxSpectral>),
}

/// Exact sampler of the field on a graph, optionally conditioned on its
/// values at a fixed vertex set.
///
/// With fixed vertices `F` and values `v`, the field is `ψ + Σ v_i h_i` with
/// `ψ` the field killed on `F` and `h_i(y) = P_y(X_{H_F} = F_i)`.
pub struct GffSampler<'g> {
    graph: &'g WeightedGraph,
    fixed: Vec<Vertex>,
    harmonic: Vec<Vec<f64>>,
    /// `None` when every vertex is fixed.
    backend: Option<Backend>,
}

impl<'g> GffSampler<'g> {
    /// Free field; Dirichlet boxes use the sine transform, other graphs a
    /// cached Cholesky factor.
    pub fn new(graph: &'g WeightedGraph) -> Result<Self, SamplerError> {
        if let Some(geo) = graph.lattice() {
            return Ok(Self {
                graph,
                fixed: Vec::new(),
                harmonic: Vec::new(),
                backend: Some(Backend::Spectral(Arc::new(BoxSpectral::new(*geo)))),
            });
        }
        Self::with_fixed(graph, &[])
    }

    /// Factor-based sampler conditioned on values at `fixed`.
    pub fn with_fixed(graph: &'g WeightedGraph, fixed: &[Vertex]) -> Result<Self, SamplerError> {
        if let Some(&v) = fixed.iter().find(|&&v| v >= graph.vertex_count()) {
            return Err(SamplerError::VertexOutOfRange(v));
        }
        let mut sorted = fixed.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let harmonic = fixed
            .iter()
            .map(|&f| dirichlet(graph, &sorted, |v| if v == f { 1.0 } else { 0.0 }))
            .collect::<Result<Vec<_>, _>>()?;
        let backend = if sorted.len() == graph.vertex_count() {
            None
        } else {
            Some(Backend::Factor(cached_solver(graph, &sorted)?))
        };
        Ok(Self {
            graph,
            fixed: fixed.to_vec(),
            harmonic,
            backend,
        })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn spectral(&self) -> Option<&BoxSpectral> {
        match &self.backend {
            Some(Backend::Spectral(s)) => Some(s),
            _ => None,
        }
    }

    /// Values of the free box field of sample `id` on `window`, equal to the
    /// matching entries of [`GffSampler::draw`]. `None` without the spectral
    /// backend.
    pub fn draw_window(&self, id: SampleId, window: &Window) -> Option<Vec<f64>> {
        let spec = self.spectral()?;
        let mut rng = sample_stream(id.master, id.index, Stream::Field);
        let z: Vec<f64> = (0..self.graph.vertex_count())
            .map(|_| rng.sample(StandardNormal))
            .collect();
        Some(spec.sample(&z, window))
    }

    /// Vertex values for sample `id` with the given values on the fixed set.
    pub fn draw(&self, id: SampleId, fixed_values: &[f64]) -> Result<Vec<f64>, SamplerError> {
        if fixed_values.len() != self.fixed.len() {
            return Err(SamplerError::BoundaryValues {
                expected: self.fixed.len(),
                got: fixed_values.len(),
            });
        }
        let g = self.graph;
        let n = g.vertex_count();
        let mut rng = sample_stream(id.master, id.index, Stream::Field);
        let mut phi = match &self.backend {
            None => vec![0.0; n],
            Some(Backend::Spectral(spec)) => {
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let geo = spec.geometry();
                spec.sample(&z, &Window::full(geo.dimension, geo.side))
            }
            Some(Backend::Factor(solver)) => {
                let index = solver.index();
                let m = index.len();
                let mut local: Vec<f64> = match solver.dense_factor() {
                    Some(factor) => {
                        let mut z: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
                        factor.backward_in_place(&mut z);
                        z
                    }
                    None => {
                        // w = Bᵀ W^{1/2} ξ + K^{1/2} ζ has covariance A, so A⁻¹ w has A⁻¹
                        let mut w = vec![0.0; m];
                        for (i, &y) in index.kept.iter().enumerate() {
                            let mut kill = g.killing(y);
                            for &(z, id) in g.neighbors(y) {
                                if index.position[z].is_none() {
                                    kill += g.edge(id).weight;
                                }
                            }
                            let zeta: f64 = rng.sample(StandardNormal);
                            w[i] += kill.sqrt() * zeta;
                        }
                        for e in g.edges() {
                            if let (Some(i), Some(j)) = (index.position[e.u], index.position[e.v]) {
                                let xi: f64 = rng.sample(StandardNormal);
                                let s = e.weight.sqrt() * xi;
                                w[i] += s;
                                w[j] -= s;
                            }
                        }
                        solver.solve_in_place(&mut w);
                        w
                    }
                };
                let mut full = vec![0.0; n];
                for (&y, v) in index.kept.iter().zip(local.drain(..)) {
                    full[y] = v;
                }
                full
            }
        };
        for (h, &value) in self.harmonic.iter().zip(fixed_values) {
            for (p, hv) in phi.iter_mut().zip(h) {
                *p += value * hv;
            }
        }
        for (&f, &value) in self.fixed.iter().zip(fixed_values) {
            phi[f] = value;
        }
        Ok(phi)
    }

    /// Field plus crossing indicators at `level`.
    pub fn sample(
        &self,
        level: f64,
        id: SampleId,
        fixed_values: &[f64],
    ) -> Result<FieldSample, SamplerError> {
        let phi = self.draw(id, fixed_values)?;
        Ok(with_crossings(self.graph, phi, level, id))
    }
}

/// Attaches crossing indicators to vertex values.
pub fn with_crossings(g: &WeightedGraph, phi: Vec<f64>, level: f64, id: SampleId) -> FieldSample {
    let uniforms = EdgeUniforms::first(id.master, id.index, g.edge_count());
    let open = g
        .edges()
        .iter()
        .zip(uniforms)
        .map(|(edge, u)| {
            phi[edge.u] >= level
                && phi[edge.v] >= level
                && cable_open(edge.weight, phi[edge.u], phi[edge.v], level, u)
        })
        .collect();
    FieldSample {
        level,
        phi,
        open,
        id,
    }
}

/// Free-field sample at `level` with crossing indicators.
pub fn sample_field(g: &WeightedGraph, level: f64, id: SampleId) -> Result<FieldSample, SamplerError> {
    GffSampler::new(g)?.sample(level, id, &[])
}

/// Field conditioned on `phi_x = value`: the field killed at `x` plus
/// `value · P_·(H_x < ∞)`.
pub fn conditional_sample(
    g: &WeightedGraph,
    x: Vertex,
    value: f64,
    level: f64,
    id: SampleId,
) -> Result<FieldSample, SamplerError> {
    GffSampler::with_fixed(g, &[x])?.sample(level, id, &[value])
}

/// Component of `base` in the open-cable subgraph of vertices at or above
/// the level.
pub fn cluster_of(g: &WeightedGraph, sample: &FieldSample, base: Vertex) -> ClusterAtLevel {
    let mut cluster = ClusterAtLevel {
        base,
        level: sample.level,
        vertices: Vec::new(),
        open_edges: Vec::new(),
    };
    if sample.phi[base] < sample.level {
        return cluster;
    }
    let mut seen = vec![false; g.vertex_count()];
    seen[base] = true;
    let mut queue = VecDeque::from([base]);
    while let Some(x) = queue.pop_front() {
        cluster.vertices.push(x);
        for &(y, id) in g.neighbors(x) {
            if sample.open[id] {
                if x < y {
                    cluster.open_edges.push(id);
                }
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    cluster.vertices.sort_unstable();
    cluster.open_edges.sort_unstable();
    cluster
}
