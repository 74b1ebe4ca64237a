use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Edge, GraphError, LatticeBox, Vertex, WeightedGraph};

/// Nearest-neighbor box `{0..side-1}^dimension` with uniform conductance.
///
/// Every lattice neighbor that falls outside the box becomes killing of the
/// same weight, so the walk is the lattice walk killed on leaving the box.
pub fn build_lattice_box(
    dimension: usize,
    side: usize,
    weight: f64,
) -> Result<WeightedGraph, GraphError> {
    if !(2..=5).contains(&dimension) {
        return Err(GraphError::DimensionOutOfRange(dimension));
    }
    if side < 2 {
        return Err(GraphError::SideOutOfRange(side));
    }
    if !(weight > 0.0 && weight.is_finite()) {
        return Err(GraphError::NonPositiveWeight(0, 0, weight));
    }
    let geometry = LatticeBox {
        dimension,
        side,
        weight,
    };
    let n = geometry.len();
    let mut edges = Vec::with_capacity(n * dimension);
    let mut killing = vec![0.0; n];
    let mut coords = vec![0usize; dimension];
    for x in 0..n {
        let mut stride = 1;
        for axis in (0..dimension).rev() {
            let c = coords[axis];
            if c == 0 {
                killing[x] += weight;
            }
            if c + 1 == side {
                killing[x] += weight;
            } else {
                edges.push(Edge {
                    u: x,
                    v: x + stride,
                    weight,
                });
            }
            stride *= side;
        }
        // advance row-major coordinates, last axis fastest
        for axis in (0..dimension).rev() {
            coords[axis] += 1;
            if coords[axis] < side {
                break;
            }
            coords[axis] = 0;
        }
    }
    edges.sort_by_key(|e| (e.u, e.v));
    Ok(WeightedGraph::assemble(n, edges, killing, Some(geometry)))
}

/// Builds a validated graph from an edge list and a sparse killing list.
/// The vertex count is one more than the largest id mentioned.
pub fn build_from_edge_list(
    edges: &[(Vertex, Vertex, f64)],
    killing: &[(Vertex, f64)],
) -> Result<WeightedGraph, GraphError> {
    let n = edges
        .iter()
        .flat_map(|&(u, v, _)| [u, v])
        .chain(killing.iter().map(|&(u, _)| u))
        .max()
        .map(|m| m + 1)
        .ok_or(GraphError::Empty)?;
    let mut kappa = vec![0.0; n];
    for &(u, k) in killing {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(GraphError::NegativeKilling(u, k));
        }
        kappa[u] += k;
    }
    WeightedGraph::new(n, edges.iter().copied(), kappa)
}

/// Two vertices joined by a unit edge, unit killing at both ends.
///
/// `g = [[2/3, 1/3], [1/3, 2/3]]`; used as the hand-checked fixture.
pub fn p2_killed() -> WeightedGraph {
    build_from_edge_list(&[(0, 1, 1.0)], &[(0, 1.0), (1, 1.0)]).expect("valid fixture")
}

/// 3×3 grid with unit weights and unit killing on the four corners.
/// Vertex `3 * row + col`; the center is 4.
pub fn grid3_corner_killed() -> WeightedGraph {
    let mut edges = Vec::new();
    for r in 0..3 {
        for c in 0..3 {
            let v = 3 * r + c;
            if c < 2 {
                edges.push((v, v + 1, 1.0));
            }
            if r < 2 {
                edges.push((v, v + 3, 1.0));
            }
        }
    }
    build_from_edge_list(&edges, &[(0, 1.0), (2, 1.0), (6, 1.0), (8, 1.0)])
        .expect("valid fixture")
}

#[derive(Debug, Clone)]
pub struct RandomGraphParams {
    pub min_vertices: usize,
    pub max_vertices: usize,
    pub extra_edge_probability: f64,
    pub weight_range: (f64, f64),
}

impl Default for RandomGraphParams {
    fn default() -> Self {
        Self {
            min_vertices: 2,
            max_vertices: 40,
            extra_edge_probability: 0.08,
            weight_range: (0.5, 2.0),
        }
    }
}

/// Seeded random connected graph: a random recursive tree plus extra edges,
/// weights uniform in `weight_range`, and killing in `(0, 1]` on at least one
/// vertex. `(seed, index)` determines the graph.
pub fn random_test_graph(seed: u64, index: u64, params: &RandomGraphParams) -> WeightedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let n = rng.random_range(params.min_vertices..=params.max_vertices);
    let (lo, hi) = params.weight_range;
    let mut edges = Vec::new();
    let mut present = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        present.insert((u, v));
        edges.push((u, v, rng.random_range(lo..=hi)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present.contains(&(u, v)) && rng.random_bool(params.extra_edge_probability) {
                edges.push((u, v, rng.random_range(lo..=hi)));
            }
        }
    }
    let mut killing = vec![0.0; n];
    let killed = rng.random_range(1..=(n / 5).max(1));
    for _ in 0..killed {
        let v = rng.random_range(0..n);
        killing[v] = 1.0 - rng.random::<f64>();
    }
    WeightedGraph::new(n, edges, killing).expect("random construction is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_box_rejected() {
        assert_eq!(
            build_lattice_box(1, 4, 1.0).unwrap_err(),
            GraphError::DimensionOutOfRange(1)
        );
        assert_eq!(
            build_lattice_box(3, 1, 1.0).unwrap_err(),
            GraphError::SideOutOfRange(1)
        );
    }

    #[test]
    fn cube_of_side_two() {
        let g = build_lattice_box(3, 2, 1.0).unwrap();
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.edge_count(), 12);
        let geo = *g.lattice().unwrap();
        for x in 0..8 {
            // count the six lattice neighbors that leave the box
            let outside = (0..3)
                .flat_map(|axis| [-1i64, 1].map(move |s| (axis, s)))
                .filter(|&(axis, s)| {
                    let mut step = [0i64; 3];
                    step[axis] = s;
                    geo.offset(x, &step).is_none()
                })
                .count();
            assert_eq!(outside, 3);
            assert_eq!(g.killing(x), 3.0);
            assert_eq!(g.total_weight(x), 6.0);
        }
    }

    #[test]
    fn square_center_is_interior() {
        let g = build_lattice_box(2, 3, 1.0).unwrap();
        let c = g.lattice().unwrap().center();
        assert_eq!(c, 4);
        assert_eq!(g.killing(c), 0.0);
        assert_eq!(g.total_weight(c), 4.0);
        // every vertex has total weight 2d
        for x in 0..9 {
            assert_eq!(g.total_weight(x), 4.0);
        }
    }

    #[test]
    fn p2_fixture() {
        let g = p2_killed();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.total_weight(0), 2.0);
        assert_eq!(g.total_weight(1), 2.0);
    }

    #[test]
    fn edge_list_errors() {
        assert_eq!(
            build_from_edge_list(&[(0, 1, 1.0)], &[]).unwrap_err(),
            GraphError::NoKilling
        );
        assert_eq!(
            build_from_edge_list(&[(0, 1, 1.0), (2, 3, 1.0)], &[(0, 1.0), (2, 1.0)]).unwrap_err(),
            GraphError::Disconnected
        );
        assert!(matches!(
            build_from_edge_list(&[(0, 1, -1.0)], &[(0, 1.0)]).unwrap_err(),
            GraphError::NonPositiveWeight(..)
        ));
    }

    #[test]
    fn random_graphs_are_reproducible_and_valid() {
        let p = RandomGraphParams::default();
        for i in 0..20 {
            let a = random_test_graph(7, i, &p);
            let b = random_test_graph(7, i, &p);
            assert_eq!(a.fingerprint(), b.fingerprint());
            assert!(a.vertex_count() <= 40);
            assert!(a
                .edges()
                .iter()
                .all(|e| (0.5..=2.0).contains(&e.weight)));
            assert!(a.killing_measure().iter().any(|&k| k > 0.0 && k <= 1.0));
        }
    }
}
