use serde::Serialize;

use super::{check_vertices, green_column, hitting_vector, PotentialError};
use crate::graph::{Vertex, WeightedGraph};
use crate::linalg::{Cholesky, SymmetricMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumMeasure {
    /// Sorted support set `K`.
    pub support: Vec<Vertex>,
    /// `e_K(x)` for each `x` in `support`.
    pub weights: Vec<f64>,
    pub capacity: f64,
}

/// `e_K(x) = λ_x P_x(H̃_K = ∞)`, by a one-step decomposition:
/// `e_K(x) = κ_x + Σ_{y∉K} λ_{x,y} (1 − P_y(H_K < ∞))`.
pub fn equilibrium_measure(
    g: &WeightedGraph,
    set: &[Vertex],
) -> Result<EquilibriumMeasure, PotentialError> {
    let u = hitting_vector(g, set)?;
    let in_set = g.mask(&u.target);
    let weights: Vec<f64> = u
        .target
        .iter()
        .map(|&x| {
            g.killing(x)
                + g.neighbors(x)
                    .iter()
                    .filter(|(y, _)| !in_set[*y])
                    .map(|&(y, id)| g.edge(id).weight * (1.0 - u.values[y]))
                    .sum::<f64>()
        })
        .collect();
    let capacity = weights.iter().sum();
    Ok(EquilibriumMeasure {
        support: u.target,
        weights,
        capacity,
    })
}

/// `cap(K) = 1ᵀ (g|_{K×K})⁻¹ 1`.
pub fn capacity_from_green(g: &WeightedGraph, set: &[Vertex]) -> Result<f64, PotentialError> {
    if set.is_empty() {
        return Err(PotentialError::EmptySet);
    }
    check_vertices(g, set)?;
    let mut k = set.to_vec();
    k.sort_unstable();
    k.dedup();
    let columns = k
        .iter()
        .map(|&y| green_column(g, &[], y))
        .collect::<Result<Vec<_>, _>>()?;
    let sub = SymmetricMatrix::from_fn(k.len(), |i, j| columns[j][k[i]]);
    let mut ones = vec![1.0; k.len()];
    Cholesky::factor(&sub)?.solve_in_place(&mut ones);
    Ok(ones.iter().sum())
}
