use super::{Edge, Embedding, GraphError, Vertex, WeightedGraph};
use crate::potential;

/// Replaces every edge of weight `λ` by a path of `m` edges of weight `mλ`
/// through `m - 1` new vertices without killing.
///
/// Original vertices keep their ids; the new vertices of edge `e` are
/// `n + e (m - 1) + j`, `j = 0..m-1`, ordered from `e.u` to `e.v`. This is
/// a network equivalence: the Green function between original vertices
/// does not change.
pub fn refine(g: &WeightedGraph, m: usize) -> Result<(WeightedGraph, Embedding), GraphError> {
    if m == 0 {
        return Err(GraphError::InvalidArgument(
            "refinement factor must be at least 1".into(),
        ));
    }
    let n = g.vertex_count();
    if m == 1 {
        return Ok((g.clone(), identity_embedding(n)));
    }
    let extra = (m - 1) * g.edge_count();
    let mut edges = Vec::with_capacity(m * g.edge_count());
    for (id, e) in g.edges().iter().enumerate() {
        let w = e.weight * m as f64;
        let first = n + id * (m - 1);
        edges.push(Edge {
            u: e.u,
            v: first,
            weight: w,
        });
        for j in 0..m - 2 {
            edges.push(Edge {
                u: first + j,
                v: first + j + 1,
                weight: w,
            });
        }
        edges.push(Edge {
            u: e.v.min(first + m - 2),
            v: e.v.max(first + m - 2),
            weight: w,
        });
    }
    edges.sort_by_key(|e| (e.u, e.v));
    let mut killing = g.killing_measure().to_vec();
    killing.resize(n + extra, 0.0);
    let refined = WeightedGraph::assemble(n + extra, edges, killing, None);
    let embedding = Embedding {
        to_new: (0..n).map(Some).collect(),
        to_old: (0..n + extra).map(|v| (v < n).then_some(v)).collect(),
    };
    Ok((refined, embedding))
}

fn identity_embedding(n: usize) -> Embedding {
    Embedding {
        to_new: (0..n).map(Some).collect(),
        to_old: (0..n).map(Some).collect(),
    }
}

/// Component of `base` in `G \ K`, with the conductance into `K` turned into
/// extra killing: `κ'_y = κ_y + Σ_{x ∈ K, x ~ y} λ_{y,x}`.
///
/// The walk on the result is the walk on `g` killed when it hits `K`.
pub fn delete_set(
    g: &WeightedGraph,
    removed: &[Vertex],
    base: Vertex,
) -> Result<(WeightedGraph, Embedding), GraphError> {
    let n = g.vertex_count();
    for &v in removed.iter().chain([&base]) {
        if v >= n {
            return Err(GraphError::VertexOutOfRange {
                vertex: v,
                count: n,
            });
        }
    }
    let blocked = g.mask(removed);
    if blocked[base] {
        return Err(GraphError::BaseDeleted(base));
    }
    if removed.is_empty() {
        return Ok((g.clone(), identity_embedding(n)));
    }
    let kept = g.component_avoiding(base, &blocked);
    let mut to_new = vec![None; n];
    for (i, &v) in kept.iter().enumerate() {
        to_new[v] = Some(i);
    }
    let mut killing = Vec::with_capacity(kept.len());
    let mut edges = Vec::new();
    for &y in &kept {
        let mut k = g.killing(y);
        for &(z, id) in g.neighbors(y) {
            let w = g.edge(id).weight;
            if blocked[z] {
                k += w;
            } else if y < z {
                let (a, b) = (to_new[y].unwrap(), to_new[z].unwrap());
                edges.push(Edge {
                    u: a.min(b),
                    v: a.max(b),
                    weight: w,
                });
            }
        }
        killing.push(k);
    }
    edges.sort_by_key(|e| (e.u, e.v));
    let out = WeightedGraph::assemble(kept.len(), edges, killing, None);
    let embedding = Embedding {
        to_new,
        to_old: kept.iter().map(|&v| Some(v)).collect(),
    };
    Ok((out, embedding))
}

/// Result of conditioning the walk to hit a vertex `x`.
#[derive(Debug, Clone)]
pub struct DoobTransform {
    pub graph: WeightedGraph,
    pub embedding: Embedding,
    /// `h(y) = P_y(H_x < ∞)` on the vertices of the source graph.
    pub h: Vec<f64>,
    pub conditioned_on: Vertex,
}

/// Doob transform of `g` killed at `x` by `h(y) = P_y(H_x < ∞)`, restricted
/// to the component of `base` in `G \ {x}`.
///
/// Weights become `h(y) h(z) λ_{y,z}` and killing `h(y) λ_{y,x}`. Original
/// killing is dropped: conditioned on reaching `x` the walk never dies
/// elsewhere. With this choice `λ^h_y = h(y)^2 λ_y` holds at every vertex.
pub fn doob_transform(
    g: &WeightedGraph,
    x: Vertex,
    base: Vertex,
) -> Result<DoobTransform, GraphError> {
    if g.vertex_count() == 1 {
        return Err(GraphError::EmptyResult);
    }
    if base == x {
        return Err(GraphError::BaseDeleted(base));
    }
    let h = potential::hitting_vector(g, &[x])
        .map_err(|e| GraphError::Potential(e.to_string()))?
        .values;
    let (killed, embedding) = delete_set(g, &[x], base)?;
    let mut edges = Vec::with_capacity(killed.edge_count());
    for e in killed.edges() {
        let (hu, hv) = (
            h[embedding.old_of(e.u).unwrap()],
            h[embedding.old_of(e.v).unwrap()],
        );
        edges.push(Edge {
            u: e.u,
            v: e.v,
            weight: hu * hv * e.weight,
        });
    }
    let killing = (0..killed.vertex_count())
        .map(|y| {
            let old = embedding.old_of(y).unwrap();
            h[old] * g.weight(old, x)
        })
        .collect();
    let graph = WeightedGraph::assemble(killed.vertex_count(), edges, killing, None);
    Ok(DoobTransform {
        graph,
        embedding,
        h,
        conditioned_on: x,
    })
}
