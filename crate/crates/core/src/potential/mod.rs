//! Killed Green functions, hitting probabilities, equilibrium measures and
//! capacities of vertex sets, by direct linear solves.

mod capacity;
mod identities;

use thiserror::Error;

use crate::graph::{GraphError, Vertex, WeightedGraph};
use crate::linalg::{cached_solver, LinalgError, RestrictedIndex, SymmetricMatrix};

pub use capacity::{capacity_from_green, equilibrium_measure, EquilibriumMeasure};
pub use identities::{
    check_identities, doob_capacity_identity, DoobIdentity, IdentityResiduals,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("vertex {vertex} out of range for {count} vertices")]
    VertexOutOfRange { vertex: Vertex, count: usize },
    #[error("target set is empty")]
    EmptySet,
    #[error("the killed set covers every vertex")]
    NothingLeft,
    #[error("base point and target coincide at vertex {0}")]
    SameVertex(Vertex),
    #[error("sets overlap at vertex {0}")]
    Overlap(Vertex),
    #[error("set is not connected")]
    Disconnected,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

pub(crate) fn check_vertices(g: &WeightedGraph, set: &[Vertex]) -> Result<(), PotentialError> {
    let count = g.vertex_count();
    match set.iter().find(|&&v| v >= count) {
        Some(&vertex) => Err(PotentialError::VertexOutOfRange { vertex, count }),
        None => Ok(()),
    }
}

/// Killed Green function `g_U` as a dense matrix on the complement of `U`.
#[derive(Debug, Clone)]
pub struct GreenMatrix {
    killed: Vec<Vertex>,
    index: RestrictedIndex,
    values: SymmetricMatrix,
}

impl GreenMatrix {
    /// `g_U(x, y)`, zero when either point lies in `U`.
    pub fn get(&self, x: Vertex, y: Vertex) -> f64 {
        match (self.index.position[x], self.index.position[y]) {
            (Some(i), Some(j)) => self.values.get(i, j),
            _ => 0.0,
        }
    }

    pub fn killed_set(&self) -> &[Vertex] {
        &self.killed
    }

    pub fn index(&self) -> &RestrictedIndex {
        &self.index
    }

    /// Values in the restricted numbering of [`GreenMatrix::index`].
    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.values
    }

    /// Submatrix on graph vertices `set` (all outside `U`).
    pub fn submatrix(&self, set: &[Vertex]) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(set.len(), |i, j| self.get(set[i], set[j]))
    }
}

/// Inverse of the Laplacian restricted to the complement of `killed`.
pub fn green(g: &WeightedGraph, killed: &[Vertex]) -> Result<GreenMatrix, PotentialError> {
    check_vertices(g, killed)?;
    let solver = cached_solver(g, killed)?;
    let index = solver.index().clone();
    let n = index.len();
    let mut values = SymmetricMatrix::zeros(n);
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.iter_mut().for_each(|c| *c = 0.0);
        col[j] = 1.0;
        solver.solve_refined(g, &mut col);
        // average the two triangles
        for (i, &v) in col.iter().enumerate() {
            let w = if i == j { v } else { 0.5 * v };
            values.add_symmetric(i, j, w);
        }
    }
    let mut killed = killed.to_vec();
    killed.sort_unstable();
    killed.dedup();
    Ok(GreenMatrix {
        killed,
        index,
        values,
    })
}

/// Column `g_U(·, y)` over all graph vertices (zero on `U`).
pub fn green_column(
    g: &WeightedGraph,
    killed: &[Vertex],
    y: Vertex,
) -> Result<Vec<f64>, PotentialError> {
    check_vertices(g, killed)?;
    check_vertices(g, &[y])?;
    let solver = cached_solver(g, killed)?;
    let index = solver.index();
    let mut out = vec![0.0; g.vertex_count()];
    let Some(j) = index.position[y] else {
        return Ok(out);
    };
    let mut col = vec![0.0; index.len()];
    col[j] = 1.0;
    solver.solve_refined(g, &mut col);
    for (&v, &c) in index.kept.iter().zip(&col) {
        out[v] = c;
    }
    Ok(out)
}

/// `u(y) = P_y(H_K < ∞)` for every vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct HittingVector {
    pub target: Vec<Vertex>,
    pub values: Vec<f64>,
}

/// Solves the Dirichlet problem `u = boundary` on `fixed`, harmonic (with
/// killing) elsewhere. `boundary[i]` is the value on `fixed[i]`.
pub(crate) fn dirichlet(
    g: &WeightedGraph,
    fixed: &[Vertex],
    boundary: impl Fn(Vertex) -> f64,
) -> Result<Vec<f64>, PotentialError> {
    let n = g.vertex_count();
    let mut out = vec![0.0; n];
    let mut is_fixed = vec![false; n];
    for &v in fixed {
        is_fixed[v] = true;
        out[v] = boundary(v);
    }
    if fixed.len() == n || is_fixed.iter().all(|&f| f) {
        return Ok(out);
    }
    let solver = cached_solver(g, fixed)?;
    let index = solver.index();
    let mut rhs = vec![0.0; index.len()];
    for (i, &y) in index.kept.iter().enumerate() {
        for &(z, id) in g.neighbors(y) {
            if is_fixed[z] {
                rhs[i] += g.edge(id).weight * out[z];
            }
        }
    }
    solver.solve_refined(g, &mut rhs);
    for (&y, &v) in index.kept.iter().zip(&rhs) {
        out[y] = v;
    }
    Ok(out)
}

pub fn hitting_vector(g: &WeightedGraph, target: &[Vertex]) -> Result<HittingVector, PotentialError> {
    if target.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    check_vertices(g, target)?;
    let mut set = target.to_vec();
    set.sort_unstable();
    set.dedup();
    let values = dirichlet(g, &set, |_| 1.0)?;
    Ok(HittingVector {
        target: set,
        values,
    })
}

/// `P_from(H_K < ∞)` computed by the direct solve and reconstructed from the
/// last-exit formula `Σ_{y∈K} g(from, y) e_K(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingProbability {
    pub direct: f64,
    pub reconstructed: f64,
}

impl HittingProbability {
    pub fn residual(&self) -> f64 {
        (self.direct - self.reconstructed).abs()
    }

    pub fn agrees(&self) -> bool {
        self.residual() < 1e-9
    }
}

pub fn hitting_probability(
    g: &WeightedGraph,
    target: &[Vertex],
    from: Vertex,
) -> Result<HittingProbability, PotentialError> {
    check_vertices(g, &[from])?;
    let u = hitting_vector(g, target)?;
    let eq = equilibrium_measure(g, target)?;
    let column = green_column(g, &[], from)?;
    let reconstructed = eq
        .support
        .iter()
        .zip(&eq.weights)
        .map(|(&y, &e)| column[y] * e)
        .sum();
    Ok(HittingProbability {
        direct: u.values[from],
        reconstructed,
    })
}

/// `P_from(H_A < H_K)`: walk hits `target` before `obstacle` (and before
/// being killed).
pub fn hitting_before(
    g: &WeightedGraph,
    target: &[Vertex],
    obstacle: &[Vertex],
    from: Vertex,
) -> Result<f64, PotentialError> {
    if target.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    check_vertices(g, target)?;
    check_vertices(g, obstacle)?;
    check_vertices(g, &[from])?;
    let in_target = g.mask(target);
    if let Some(&v) = obstacle.iter().find(|&&v| in_target[v]) {
        return Err(PotentialError::Overlap(v));
    }
    if in_target[from] {
        return Ok(1.0);
    }
    if obstacle.contains(&from) {
        return Ok(0.0);
    }
    let mut fixed: Vec<Vertex> = target.iter().chain(obstacle).copied().collect();
    fixed.sort_unstable();
    fixed.dedup();
    let u = dirichlet(g, &fixed, |v| if in_target[v] { 1.0 } else { 0.0 })?;
    Ok(u[from])
}
