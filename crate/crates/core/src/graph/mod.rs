//! Finite weighted graphs with killing, `(G, λ, κ)`.
//!
//! A [`WeightedGraph`] is immutable once built. Construction validates the
//! structural invariants the rest of the crate relies on: symmetric strictly
//! positive conductances, a single connected component, and at least one
//! vertex with positive killing (so the walk is transient).

mod build;
mod io;
mod region;
mod transform;

use std::collections::VecDeque;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use build::{
    build_from_edge_list, build_lattice_box, grid3_corner_killed, p2_killed, random_test_graph,
    RandomGraphParams,
};
pub use io::{parse_graph, read_graph_file, write_graph};
pub use region::{graph_distances, resolve_region, scaled_radius, Region, RegionKind};
pub use transform::{delete_set, doob_transform, refine, DoobTransform};

pub type Vertex = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("dimension {0} out of range (expected 2..=5)")]
    DimensionOutOfRange(usize),
    #[error("side {0} out of range (expected >= 2)")]
    SideOutOfRange(usize),
    #[error("graph has no vertices")]
    Empty,
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: Vertex, count: usize },
    #[error("edge {{{0}, {1}}} has nonpositive or non-finite weight {2}")]
    NonPositiveWeight(Vertex, Vertex, f64),
    #[error("vertex {0} has negative or non-finite killing {1}")]
    NegativeKilling(Vertex, f64),
    #[error("self loop at vertex {0}")]
    SelfLoop(Vertex),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(Vertex, Vertex),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("no killing anywhere: a finite graph without killing is recurrent")]
    NoKilling,
    #[error("base vertex {0} lies in the deleted set")]
    BaseDeleted(Vertex),
    #[error("transformation leaves an empty graph")]
    EmptyResult,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("region is empty")]
    EmptyRegion,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("potential theory: {0}")]
    Potential(String),
}

/// An undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub weight: f64,
}

impl Edge {
    pub fn other(&self, x: Vertex) -> Vertex {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Geometry of a Dirichlet lattice box `{0..side-1}^dimension`.
///
/// Vertex ids are row-major with the last coordinate fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeBox {
    pub dimension: usize,
    pub side: usize,
    pub weight: f64,
}

impl LatticeBox {
    pub fn len(&self) -> usize {
        self.side.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn coords(&self, mut v: Vertex) -> Vec<usize> {
        let mut c = vec![0; self.dimension];
        for slot in c.iter_mut().rev() {
            *slot = v % self.side;
            v /= self.side;
        }
        c
    }

    pub fn vertex(&self, coords: &[usize]) -> Vertex {
        coords.iter().fold(0, |acc, &c| acc * self.side + c)
    }

    pub fn center(&self) -> Vertex {
        self.vertex(&vec![self.side / 2; self.dimension])
    }

    /// Vertex at `base + offset`, if it stays inside the box.
    pub fn offset(&self, base: Vertex, offset: &[i64]) -> Option<Vertex> {
        let c = self.coords(base);
        if offset.len() != self.dimension {
            return None;
        }
        let mut out = Vec::with_capacity(self.dimension);
        for (ci, oi) in c.iter().zip(offset) {
            let x = *ci as i64 + oi;
            if x < 0 || x >= self.side as i64 {
                return None;
            }
            out.push(x as usize);
        }
        Some(self.vertex(&out))
    }
}

/// Maps vertex ids between a graph and a graph derived from it.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    /// For each vertex of the source graph, its id in the derived graph.
    pub to_new: Vec<Option<Vertex>>,
    /// For each vertex of the derived graph, its id in the source graph
    /// (`None` for vertices created by the transformation).
    pub to_old: Vec<Option<Vertex>>,
}

impl Embedding {
    pub fn new_of(&self, old: Vertex) -> Option<Vertex> {
        self.to_new.get(old).copied().flatten()
    }

    pub fn old_of(&self, new: Vertex) -> Option<Vertex> {
        self.to_old.get(new).copied().flatten()
    }
}

#[derive(Debug)]
pub struct WeightedGraph {
    edges: Vec<Edge>,
    killing: Vec<f64>,
    total_weight: Vec<f64>,
    adj_offsets: Vec<usize>,
    // (neighbor, edge id), sorted by neighbor within each vertex
    adj: Vec<(Vertex, usize)>,
    lattice: Option<LatticeBox>,
    fingerprint: OnceLock<u64>,
}

impl Clone for WeightedGraph {
    fn clone(&self) -> Self {
        Self {
            edges: self.edges.clone(),
            killing: self.killing.clone(),
            total_weight: self.total_weight.clone(),
            adj_offsets: self.adj_offsets.clone(),
            adj: self.adj.clone(),
            lattice: self.lattice,
            fingerprint: OnceLock::new(),
        }
    }
}

impl WeightedGraph {
    /// Validates and builds a graph on vertices `0..vertex_count`.
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (Vertex, Vertex, f64)>,
        killing: Vec<f64>,
    ) -> Result<Self, GraphError> {
        if vertex_count == 0 {
            return Err(GraphError::Empty);
        }
        if killing.len() != vertex_count {
            return Err(GraphError::VertexOutOfRange {
                vertex: killing.len(),
                count: vertex_count,
            });
        }
        for (x, &k) in killing.iter().enumerate() {
            if !(k >= 0.0 && k.is_finite()) {
                return Err(GraphError::NegativeKilling(x, k));
            }
        }
        let mut list = Vec::new();
        for (a, b, w) in edges {
            for v in [a, b] {
                if v >= vertex_count {
                    return Err(GraphError::VertexOutOfRange {
                        vertex: v,
                        count: vertex_count,
                    });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(GraphError::NonPositiveWeight(a, b, w));
            }
            list.push(Edge {
                u: a.min(b),
                v: a.max(b),
                weight: w,
            });
        }
        list.sort_by_key(|e| (e.u, e.v));
        for pair in list.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(GraphError::DuplicateEdge(pair[0].u, pair[0].v));
            }
        }
        let graph = Self::assemble(vertex_count, list, killing, None);
        if !graph.is_connected() {
            return Err(GraphError::Disconnected);
        }
        if graph.killing.iter().all(|&k| k == 0.0) {
            return Err(GraphError::NoKilling);
        }
        Ok(graph)
    }

    /// Builds without validation; `edges` must already be sorted and unique.
    pub(crate) fn assemble(
        vertex_count: usize,
        edges: Vec<Edge>,
        killing: Vec<f64>,
        lattice: Option<LatticeBox>,
    ) -> Self {
        let mut degree = vec![0usize; vertex_count];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut adj_offsets = Vec::with_capacity(vertex_count + 1);
        adj_offsets.push(0);
        for d in &degree {
            adj_offsets.push(adj_offsets.last().unwrap() + d);
        }
        let mut fill = adj_offsets[..vertex_count].to_vec();
        let mut adj = vec![(0, 0); adj_offsets[vertex_count]];
        for (id, e) in edges.iter().enumerate() {
            adj[fill[e.u]] = (e.v, id);
            fill[e.u] += 1;
            adj[fill[e.v]] = (e.u, id);
            fill[e.v] += 1;
        }
        for x in 0..vertex_count {
            adj[adj_offsets[x]..adj_offsets[x + 1]].sort_unstable();
        }
        let mut total_weight = killing.clone();
        for e in &edges {
            total_weight[e.u] += e.weight;
            total_weight[e.v] += e.weight;
        }
        Self {
            edges,
            killing,
            total_weight,
            adj_offsets,
            adj,
            lattice,
            fingerprint: OnceLock::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.killing.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn killing(&self, x: Vertex) -> f64 {
        self.killing[x]
    }

    pub fn killing_measure(&self) -> &[f64] {
        &self.killing
    }

    /// `λ_x = κ_x + Σ_y λ_{x,y}`.
    pub fn total_weight(&self, x: Vertex) -> f64 {
        self.total_weight[x]
    }

    pub fn total_weights(&self) -> &[f64] {
        &self.total_weight
    }

    /// Neighbors of `x` with the id of the connecting edge, sorted by neighbor.
    pub fn neighbors(&self, x: Vertex) -> &[(Vertex, usize)] {
        &self.adj[self.adj_offsets[x]..self.adj_offsets[x + 1]]
    }

    /// Conductance `λ_{x,y}`, zero when not adjacent.
    pub fn weight(&self, x: Vertex, y: Vertex) -> f64 {
        self.edge_between(x, y)
            .map(|id| self.edges[id].weight)
            .unwrap_or(0.0)
    }

    pub fn edge_between(&self, x: Vertex, y: Vertex) -> Option<usize> {
        let nb = self.neighbors(x);
        nb.binary_search_by_key(&y, |&(z, _)| z)
            .ok()
            .map(|i| nb[i].1)
    }

    pub fn lattice(&self) -> Option<&LatticeBox> {
        self.lattice.as_ref()
    }

    /// Recomputes `λ_x` from edges and killing; used to check the cache.
    pub fn recomputed_total_weight(&self, x: Vertex) -> f64 {
        self.killing[x]
            + self
                .neighbors(x)
                .iter()
                .map(|&(_, id)| self.edges[id].weight)
                .sum::<f64>()
    }

    /// Stable content hash over vertex count, edges and killing.
    pub fn fingerprint(&self) -> u64 {
        *self.fingerprint.get_or_init(|| {
            let mut hasher = Sha256::new();
            hasher.update((self.vertex_count() as u64).to_le_bytes());
            for e in &self.edges {
                hasher.update((e.u as u64).to_le_bytes());
                hasher.update((e.v as u64).to_le_bytes());
                hasher.update(e.weight.to_bits().to_le_bytes());
            }
            for k in &self.killing {
                hasher.update(k.to_bits().to_le_bytes());
            }
            let digest = hasher.finalize();
            u64::from_le_bytes(digest[..8].try_into().unwrap())
        })
    }

    fn is_connected(&self) -> bool {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = queue.pop_front() {
            for &(y, _) in self.neighbors(x) {
                if !seen[y] {
                    seen[y] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    /// Vertices reachable from `start` without entering `blocked`.
    pub fn component_avoiding(&self, start: Vertex, blocked: &[bool]) -> Vec<Vertex> {
        let mut seen = vec![false; self.vertex_count()];
        let mut out = Vec::new();
        if blocked[start] {
            return out;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            out.push(x);
            for &(y, _) in self.neighbors(x) {
                if !seen[y] && !blocked[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Whether the subgraph induced on `set` is connected (empty sets are not).
    pub fn induces_connected(&self, set: &[Vertex]) -> bool {
        if set.is_empty() {
            return false;
        }
        let mut outside = vec![true; self.vertex_count()];
        for &v in set {
            outside[v] = false;
        }
        self.component_avoiding(set[0], &outside).len() == {
            let mut s = set.to_vec();
            s.sort_unstable();
            s.dedup();
            s.len()
        }
    }

    /// Boolean membership mask for a vertex list.
    pub fn mask(&self, set: &[Vertex]) -> Vec<bool> {
        let mut m = vec![false; self.vertex_count()];
        for &v in set {
            m[v] = true;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn total_weight_cache_matches_recomputation() {
        let g = random_test_graph(3, 11, &RandomGraphParams::default());
        for x in 0..g.vertex_count() {
            assert_eq!(g.total_weight(x), g.recomputed_total_weight(x));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            WeightedGraph::new(2, [(0, 1, 0.0)], vec![1.0, 1.0]).unwrap_err(),
            GraphError::NonPositiveWeight(0, 1, 0.0)
        );
        assert_eq!(
            WeightedGraph::new(2, [(0, 1, 1.0), (1, 0, 2.0)], vec![1.0, 1.0]).unwrap_err(),
            GraphError::DuplicateEdge(0, 1)
        );
        assert_eq!(
            WeightedGraph::new(2, [(1, 1, 1.0)], vec![1.0, 1.0]).unwrap_err(),
            GraphError::SelfLoop(1)
        );
        assert_eq!(
            WeightedGraph::new(2, [(0, 1, 1.0)], vec![-1.0, 1.0]).unwrap_err(),
            GraphError::NegativeKilling(0, -1.0)
        );
    }

    #[test]
    fn lattice_coordinates_round_trip() {
        let b = LatticeBox {
            dimension: 3,
            side: 5,
            weight: 1.0,
        };
        for v in 0..b.len() {
            assert_eq!(b.vertex(&b.coords(v)), v);
        }
        assert_eq!(b.coords(b.center()), vec![2, 2, 2]);
        assert_eq!(b.offset(b.center(), &[3, 0, 0]), None);
        assert_eq!(b.offset(b.center(), &[1, 0, -1]), Some(b.vertex(&[3, 2, 1])));
    }

    #[test]
    fn fingerprint_depends_on_content() {
        let a = p2_killed();
        let b = WeightedGraph::new(2, [(0, 1, 1.0)], vec![1.0, 2.0]).unwrap();
        assert_eq!(a.fingerprint(), p2_killed().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
