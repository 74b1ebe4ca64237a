use serde::Serialize;

use super::{
    capacity_from_green, check_vertices, equilibrium_measure, green, hitting_probability,
    hitting_vector, PotentialError,
};
use crate::graph::{doob_transform, Vertex, WeightedGraph};

/// Absolute residuals of the exact identities relating `g`, `g_{x}`,
/// `g_{0}` and `h = P_·(H_x < ∞)` for a base point `0` and a vertex `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `g(0,x) = h(0) g(x,x)`.
    pub green_factorization: f64,
    /// `g_{x}(0,0) = g(0,0) − h(0)² g(x,x)`.
    pub killed_at_target: f64,
    /// `g(x,x) − g_{0}(x,x) = g(0,x)² / g(0,0)`.
    pub last_exit: f64,
    /// `P_0(H_x < ∞)` by direct solve vs `g(0,x) e_{x}(x)`.
    pub hitting: f64,
    /// Equilibrium capacity of `{0, x}` vs the Green-submatrix formula,
    /// relative.
    pub capacity: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.green_factorization,
            self.killed_at_target,
            self.last_exit,
            self.hitting,
            self.capacity,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn check_identities(
    g: &WeightedGraph,
    base: Vertex,
    x: Vertex,
) -> Result<IdentityResiduals, PotentialError> {
    check_vertices(g, &[base, x])?;
    if base == x {
        return Err(PotentialError::SameVertex(x));
    }
    let full = green(g, &[])?;
    let killed_x = green(g, &[x])?;
    let killed_base = green(g, &[base])?;
    let h = hitting_vector(g, &[x])?.values;
    let (g00, gxx, g0x) = (full.get(base, base), full.get(x, x), full.get(base, x));
    let hit = hitting_probability(g, &[x], base)?;
    let eq_cap = equilibrium_measure(g, &[base, x])?.capacity;
    let green_cap = capacity_from_green(g, &[base, x])?;
    Ok(IdentityResiduals {
        green_factorization: (g0x - h[base] * gxx).abs(),
        killed_at_target: (killed_x.get(base, base) - (g00 - h[base] * h[base] * gxx)).abs(),
        last_exit: ((gxx - killed_base.get(x, x)) - g0x * g0x / g00).abs(),
        hitting: hit.residual(),
        capacity: (eq_cap - green_cap).abs() / green_cap,
    })
}

/// Both sides of `cap^h(K) = 1/g_K(x) − 1/g(x)`, the capacity of `K` after
/// conditioning the walk to hit `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoobIdentity {
    pub lhs: f64,
    pub rhs: f64,
}

impl DoobIdentity {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

pub fn doob_capacity_identity(
    g: &WeightedGraph,
    x: Vertex,
    set: &[Vertex],
) -> Result<DoobIdentity, PotentialError> {
    if set.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    check_vertices(g, set)?;
    check_vertices(g, &[x])?;
    if set.contains(&x) {
        return Err(PotentialError::Overlap(x));
    }
    if !g.induces_connected(set) {
        return Err(PotentialError::Disconnected);
    }
    let doob = doob_transform(g, x, set[0])?;
    let mapped: Vec<Vertex> = set
        .iter()
        .map(|&v| doob.embedding.new_of(v).expect("connected set stays with its base"))
        .collect();
    let lhs = equilibrium_measure(&doob.graph, &mapped)?.capacity;
    let killed = green(g, set)?.get(x, x);
    let free = green(g, &[])?.get(x, x);
    Ok(DoobIdentity {
        lhs,
        rhs: 1.0 / killed - 1.0 / free,
    })
}
