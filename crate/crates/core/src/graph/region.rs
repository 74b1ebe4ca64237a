use std::collections::VecDeque;

use super::{GraphError, Vertex, WeightedGraph};

/// Unreachable marker in distance vectors.
pub const UNREACHED: usize = usize::MAX;

/// Parameters of a vertex region around `center`, radii in graph distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionKind {
    Ball { center: Vertex, radius: usize },
    /// Ball vertices with an edge or killing cable leaving the ball.
    Boundary { center: Vertex, radius: usize },
    /// The ball together with every vertex it cuts off from the killing.
    SurroundedBall { center: Vertex, radius: usize },
    /// `B((1-inner)R) \ SurroundedBall((1-outer)R)`, requires `0 < 2 inner <= outer <= 1`.
    Annulus {
        center: Vertex,
        radius: usize,
        inner: f64,
        outer: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub kind: RegionKind,
    /// Sorted member vertices.
    pub members: Vec<Vertex>,
}

impl Region {
    pub fn contains(&self, v: Vertex) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// BFS graph distances from `source`; [`UNREACHED`] where there is no path.
pub fn graph_distances(g: &WeightedGraph, source: Vertex) -> Vec<usize> {
    let mut dist = vec![UNREACHED; g.vertex_count()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(x) = queue.pop_front() {
        for &(y, _) in g.neighbors(x) {
            if dist[y] == UNREACHED {
                dist[y] = dist[x] + 1;
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Radius `floor(fraction * radius)`, tolerant of rounding in the product.
/// `⌊fraction · radius⌋`, tolerant of rounding just below an integer.
pub fn scaled_radius(radius: usize, fraction: f64) -> usize {
    (fraction * radius as f64 + 1e-9).floor() as usize
}

fn ball_mask(dist: &[usize], radius: usize) -> Vec<bool> {
    dist.iter().map(|&d| d <= radius).collect()
}

fn surrounded_mask(g: &WeightedGraph, ball: &[bool]) -> Vec<bool> {
    let n = g.vertex_count();
    let mut reached = vec![false; n];
    let mut queue = VecDeque::new();
    for x in 0..n {
        if !ball[x] && g.killing(x) > 0.0 {
            reached[x] = true;
            queue.push_back(x);
        }
    }
    while let Some(x) = queue.pop_front() {
        for &(y, _) in g.neighbors(x) {
            if !reached[y] && !ball[y] {
                reached[y] = true;
                queue.push_back(y);
            }
        }
    }
    reached.iter().map(|r| !r).collect()
}

fn members(mask: &[bool]) -> Vec<Vertex> {
    mask.iter()
        .enumerate()
        .filter_map(|(v, &m)| m.then_some(v))
        .collect()
}

pub fn resolve_region(g: &WeightedGraph, kind: RegionKind) -> Result<Region, GraphError> {
    let center = match kind {
        RegionKind::Ball { center, .. }
        | RegionKind::Boundary { center, .. }
        | RegionKind::SurroundedBall { center, .. }
        | RegionKind::Annulus { center, .. } => center,
    };
    if center >= g.vertex_count() {
        return Err(GraphError::VertexOutOfRange {
            vertex: center,
            count: g.vertex_count(),
        });
    }
    let dist = graph_distances(g, center);
    let mask = match kind {
        RegionKind::Ball { radius, .. } => ball_mask(&dist, radius),
        RegionKind::Boundary { radius, .. } => {
            let ball = ball_mask(&dist, radius);
            (0..g.vertex_count())
                .map(|y| {
                    ball[y]
                        && (g.killing(y) > 0.0 || g.neighbors(y).iter().any(|&(z, _)| !ball[z]))
                })
                .collect()
        }
        RegionKind::SurroundedBall { radius, .. } => {
            surrounded_mask(g, &ball_mask(&dist, radius))
        }
        RegionKind::Annulus {
            radius,
            inner,
            outer,
            ..
        } => {
            if !(inner > 0.0 && 2.0 * inner <= outer && outer <= 1.0) {
                return Err(GraphError::InvalidRegion(format!(
                    "annulus fractions need 0 < 2a <= b <= 1, got a = {inner}, b = {outer}"
                )));
            }
            let big = ball_mask(&dist, scaled_radius(radius, 1.0 - inner));
            let hole = surrounded_mask(g, &ball_mask(&dist, scaled_radius(radius, 1.0 - outer)));
            big.iter().zip(&hole).map(|(&b, &h)| b && !h).collect()
        }
    };
    let members = members(&mask);
    if members.is_empty() {
        return Err(GraphError::EmptyRegion);
    }
    Ok(Region { kind, members })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_lattice_box;

    fn brute_surrounded(g: &WeightedGraph, ball: &[Vertex]) -> Vec<Vertex> {
        // a vertex is outside the surrounded ball iff some killed vertex is
        // reachable from it avoiding the ball
        let blocked = g.mask(ball);
        (0..g.vertex_count())
            .filter(|&v| {
                let comp = g.component_avoiding(v, &blocked);
                !comp.iter().any(|&w| g.killing(w) > 0.0)
            })
            .collect()
    }

    #[test]
    fn ball_of_radius_zero() {
        let g = build_lattice_box(3, 5, 1.0).unwrap();
        let c = g.lattice().unwrap().center();
        let r = resolve_region(&g, RegionKind::Ball { center: c, radius: 0 }).unwrap();
        assert_eq!(r.members, vec![c]);
    }

    #[test]
    fn convex_ball_is_its_own_surrounded_ball() {
        let g = build_lattice_box(3, 11, 1.0).unwrap();
        let c = g.lattice().unwrap().center();
        for radius in 0..4 {
            let ball = resolve_region(&g, RegionKind::Ball { center: c, radius }).unwrap();
            let sb = resolve_region(&g, RegionKind::SurroundedBall { center: c, radius }).unwrap();
            assert_eq!(ball.members, sb.members);
            assert_eq!(sb.members, brute_surrounded(&g, &ball.members));
        }
    }

    #[test]
    fn ring_surrounds_its_inside() {
        // path 0 - 1 - 2 - 3 killed at 3: deleting 1 strands 0
        let g = crate::graph::build_from_edge_list(
            &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)],
            &[(3, 1.0)],
        )
        .unwrap();
        let sb = resolve_region(&g, RegionKind::SurroundedBall { center: 1, radius: 0 }).unwrap();
        assert_eq!(sb.members, vec![0, 1]);
        assert_eq!(sb.members, brute_surrounded(&g, &[1]));
    }

    #[test]
    fn annulus_arithmetic() {
        let g = build_lattice_box(3, 24, 1.0).unwrap();
        let c = g.lattice().unwrap().center();
        let ann = resolve_region(
            &g,
            RegionKind::Annulus {
                center: c,
                radius: 8,
                inner: 0.25,
                outer: 0.5,
            },
        )
        .unwrap();
        let b6 = resolve_region(&g, RegionKind::Ball { center: c, radius: 6 }).unwrap();
        let sb4 = resolve_region(&g, RegionKind::SurroundedBall { center: c, radius: 4 }).unwrap();
        let expected: Vec<_> = b6
            .members
            .iter()
            .copied()
            .filter(|v| !sb4.contains(*v))
            .collect();
        assert_eq!(ann.members, expected);
        assert!(ann.members.iter().all(|&v| !sb4.contains(v)));
    }

    #[test]
    fn annulus_fraction_validation() {
        let g = build_lattice_box(2, 9, 1.0).unwrap();
        for (a, b) in [(0.0, 0.5), (0.3, 0.5), (0.2, 1.1)] {
            assert!(matches!(
                resolve_region(
                    &g,
                    RegionKind::Annulus {
                        center: 40,
                        radius: 4,
                        inner: a,
                        outer: b
                    }
                ),
                Err(GraphError::InvalidRegion(_))
            ));
        }
    }

    #[test]
    fn boundary_is_the_outer_shell() {
        let g = build_lattice_box(2, 11, 1.0).unwrap();
        let c = g.lattice().unwrap().center();
        let dist = graph_distances(&g, c);
        let b = resolve_region(&g, RegionKind::Boundary { center: c, radius: 3 }).unwrap();
        assert!(b.members.iter().all(|&v| dist[v] == 3));
        assert_eq!(b.len(), 12);
    }

    #[test]
    fn empty_region_rejected() {
        let g = build_lattice_box(2, 9, 1.0).unwrap();
        // the hole swallows the whole ball
        let err = resolve_region(
            &g,
            RegionKind::Annulus {
                center: 40,
                radius: 1,
                inner: 0.1,
                outer: 0.3,
            },
        );
        // B(0) \ SB(0) is empty
        assert_eq!(err.unwrap_err(), GraphError::EmptyRegion);
    }
}
