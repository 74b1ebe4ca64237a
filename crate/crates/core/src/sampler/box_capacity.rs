use std::collections::HashMap;

use crate::graph::{Vertex, WeightedGraph};
use crate::linalg::{BoxGreenTable, SymmetricMatrix};

use super::cable::{
    cable_capacity_dirichlet, capacity_of_points, CableCluster, CablePoint, Stub, StubEnd,
};
use super::{ClusterAtLevel, SamplerError};


/// Capacity value that may have been cut off early.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub enum CapacityValue {
    Exact(f64),
    /// A subset already exceeded the requested cutoff.
    AtLeast(f64),
    Infinite,
}

impl CapacityValue {
    /// `true` when the capacity is known to exceed `t`.
    pub fn exceeds(&self, t: f64) -> bool {
        match *self {
            Self::Exact(c) | Self::AtLeast(c) => c > t,
            Self::Infinite => true,
        }
    }

    /// `Some(true)` if the capacity is known to be at most `t`.
    pub fn at_most(&self, t: f64) -> Option<bool> {
        match *self {
            Self::Exact(c) => Some(c <= t),
            Self::AtLeast(c) if c > t => Some(false),
            Self::AtLeast(_) => None,
            Self::Infinite => Some(false),
        }
    }
}

/// Capacities of point sets in a Dirichlet lattice box, from pointwise box
/// Green values.
#[derive(Debug, Clone)]
pub struct BoxCapacity {
    graph: WeightedGraph,
    table: BoxGreenTable,
    /// Point sets above this size are first screened through a subset.
    screen_size: usize,
    /// Larger exact problems go to the sparse exterior solve.
    dense_points: usize,
}

impl BoxCapacity {
    pub fn new(g: &WeightedGraph, screen_size: usize) -> Option<Self> {
        g.lattice().map(|geo| Self {
            graph: g.clone(),
            table: BoxGreenTable::new(*geo),
            screen_size: screen_size.max(1),
            dense_points: 2000,
        })
    }

    pub fn with_dense_limit(mut self, dense_points: usize) -> Self {
        self.dense_points = dense_points;
        self
    }

    /// Lower bound from a regular subset, returned when it already exceeds
    /// the cutoff.
    fn screen(
        &self,
        points: &[CablePoint],
        cutoff: Option<f64>,
    ) -> Result<Option<CapacityValue>, SamplerError> {
        let Some(cut) = cutoff else { return Ok(None) };
        if points.len() <= self.screen_size {
            return Ok(None);
        }
        let step = points.len().div_ceil(self.screen_size);
        let subset: Vec<CablePoint> = points.iter().step_by(step).copied().collect();
        let lower = self.exact(&subset)?;
        Ok((lower > cut).then_some(CapacityValue::AtLeast(lower)))
    }

    fn exact(&self, points: &[CablePoint]) -> Result<f64, SamplerError> {
        let mut index: HashMap<Vertex, usize> = HashMap::new();
        let mut vertices = Vec::new();
        for p in points {
            let ends = [Some(p.from), match p.to {
                StubEnd::Vertex(v) => Some(v),
                StubEnd::Cemetery => None,
            }];
            for v in ends.into_iter().flatten() {
                index.entry(v).or_insert_with(|| {
                    vertices.push(v);
                    vertices.len() - 1
                });
            }
        }
        let geo = self.table.geometry();
        let coords: Vec<Vec<usize>> = vertices.iter().map(|&v| geo.coords(v)).collect();
        let gvv = SymmetricMatrix::from_fn(vertices.len(), |i, j| {
            if j > i {
                0.0
            } else {
                self.table.green_coords(&coords[i], &coords[j])
            }
        });
        let lookup = |a: Vertex, b: Vertex| {
            let (i, j) = (index[&a], index[&b]);
            if i >= j {
                gvv.get(i, j)
            } else {
                gvv.get(j, i)
            }
        };
        capacity_of_points(points, &lookup)
    }

    pub fn cable_capacity(
        &self,
        cluster: &CableCluster,
        cutoff: Option<f64>,
    ) -> Result<CapacityValue, SamplerError> {
        if !cluster.compact {
            return Ok(CapacityValue::Infinite);
        }
        let points = cluster.boundary_points();
        if let Some(screened) = self.screen(&points, cutoff)? {
            return Ok(screened);
        }
        if points.len() > self.dense_points {
            return Ok(CapacityValue::Exact(cable_capacity_dirichlet(&self.graph, cluster)?));
        }
        Ok(CapacityValue::Exact(self.exact(&points)?))
    }

    /// Capacity of a vertex set; vertices of `set` surrounded by `set` with no
    /// killing are dropped first since they carry no equilibrium charge.
    pub fn vertex_capacity(
        &self,
        g: &WeightedGraph,
        set: &[Vertex],
        cutoff: Option<f64>,
    ) -> Result<CapacityValue, SamplerError> {
        let member = g.mask(set);
        let outer: Vec<Vertex> = set
            .iter()
            .copied()
            .filter(|&y| g.killing(y) > 0.0 || g.neighbors(y).iter().any(|&(z, _)| !member[z]))
            .collect();
        let points: Vec<CablePoint> = outer.iter().copied().map(CablePoint::vertex).collect();
        if let Some(screened) = self.screen(&points, cutoff)? {
            return Ok(screened);
        }
        if points.len() <= self.dense_points {
            return Ok(CapacityValue::Exact(self.exact(&points)?));
        }
        // a vertex set is a cable set whose stubs all have length zero
        let mut vertices = set.to_vec();
        vertices.sort_unstable();
        vertices.dedup();
        let mut stubs = Vec::new();
        for &y in &outer {
            for &(z, e) in g.neighbors(y) {
                if !member[z] {
                    stubs.push(Stub {
                        inside: y,
                        outside: StubEnd::Vertex(z),
                        fraction: 0.0,
                        conductance: g.edge(e).weight,
                    });
                }
            }
            if g.killing(y) > 0.0 {
                stubs.push(Stub {
                    inside: y,
                    outside: StubEnd::Cemetery,
                    fraction: 0.0,
                    conductance: g.killing(y),
                });
            }
        }
        let cluster = CableCluster {
            vertices: ClusterAtLevel {
                base: vertices[0],
                level: f64::NEG_INFINITY,
                vertices,
                open_edges: Vec::new(),
            },
            stubs,
            compact: true,
        };
        Ok(CapacityValue::Exact(cable_capacity_dirichlet(&self.graph, &cluster)?))
    }
}
