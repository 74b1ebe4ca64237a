use crate::graph::{Vertex, WeightedGraph};
use crate::linalg::{Cholesky, SymmetricMatrix};
use crate::potential::{green, GreenMatrix};

use super::cable::{CableCluster, CablePoint};
use super::{ClusterAtLevel, SamplerError};

/// Green data shared by all gap evaluations for one `(graph, base, x)`.
#[derive(Debug, Clone)]
pub struct GapContext {
    pub base: Vertex,
    pub x: Vertex,
    pub green: GreenMatrix,
    /// `g_{{base}}(x, x)`, the largest possible gap.
    pub killed_at_base: f64,
}

impl GapContext {
    pub fn new(g: &WeightedGraph, base: Vertex, x: Vertex) -> Result<Self, SamplerError> {
        let n = g.vertex_count();
        if let Some(&v) = [base, x].iter().find(|&&v| v >= n) {
            return Err(SamplerError::VertexOutOfRange(v));
        }
        let green = green(g, &[])?;
        let gb = green.get(base, base);
        let gbx = green.get(base, x);
        let killed_at_base = green.get(x, x) - gbx * gbx / gb;
        Ok(Self {
            base,
            x,
            green,
            killed_at_base,
        })
    }

    /// `g_K(x) = g(x) − cᵀ G⁻¹ c` over points of `K` through which every
    /// path from `x` enters `K`.
    fn killed_green(&self, points: &[CablePoint]) -> Result<f64, SamplerError> {
        if points.is_empty() {
            return Ok(self.green.get(self.x, self.x));
        }
        let gf = |a: Vertex, b: Vertex| self.green.get(a, b);
        let m = SymmetricMatrix::from_fn(points.len(), |i, j| points[i].covariance(&points[j], &gf));
        let factor = Cholesky::factor(&m)?;
        let at_x = CablePoint::vertex(self.x);
        let c: Vec<f64> = points.iter().map(|p| p.covariance(&at_x, &gf)).collect();
        let mut w = c.clone();
        factor.solve_in_place(&mut w);
        let reduction: f64 = c.iter().zip(&w).map(|(a, b)| a * b).sum();
        Ok((self.green.get(self.x, self.x) - reduction).max(0.0))
    }
}

/// `g_{{0}}(x) − g_K(x)` for the vertex set `K` of a level-0 cluster, zero
/// when the cluster is empty.
pub fn green_gap(
    g: &WeightedGraph,
    ctx: &GapContext,
    cluster: &ClusterAtLevel,
) -> Result<f64, SamplerError> {
    if cluster.level != 0.0 {
        return Err(SamplerError::NonzeroLevel(cluster.level));
    }
    if cluster.is_empty() {
        return Ok(0.0);
    }
    if cluster.contains(ctx.x) {
        return Ok(ctx.killed_at_base);
    }
    // vertices of K with a neighbour outside carry all entrances from x
    let points: Vec<CablePoint> = cluster
        .vertices
        .iter()
        .copied()
        .filter(|&y| g.neighbors(y).iter().any(|&(z, _)| !cluster.contains(z)))
        .map(CablePoint::vertex)
        .collect();
    Ok(ctx.killed_at_base - ctx.killed_green(&points)?)
}

/// The same gap for the cable cluster, stubs included.
pub fn cable_green_gap(ctx: &GapContext, cluster: &CableCluster) -> Result<f64, SamplerError> {
    if cluster.vertices.level != 0.0 {
        return Err(SamplerError::NonzeroLevel(cluster.vertices.level));
    }
    if cluster.is_empty() {
        return Ok(0.0);
    }
    if cluster.vertices.contains(ctx.x) {
        return Ok(ctx.killed_at_base);
    }
    Ok(ctx.killed_at_base - ctx.killed_green(&cluster.boundary_points())?)
}
