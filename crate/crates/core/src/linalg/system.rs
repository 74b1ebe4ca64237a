use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use super::{Cholesky, LinalgError, SparseCholesky, SymmetricMatrix};
use crate::graph::{Vertex, WeightedGraph};

/// Systems with at most this many unknowns use a dense factorization.
pub const DENSE_LIMIT: usize = 4096;

const CACHE_BUDGET_BYTES: usize = 1 << 30;

/// Numbering of the vertices that survive killing on a set `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedIndex {
    /// Surviving vertices in increasing order.
    pub kept: Vec<Vertex>,
    /// Position of each graph vertex in `kept`.
    pub position: Vec<Option<usize>>,
}

impl RestrictedIndex {
    pub fn new(vertex_count: usize, killed: &[Vertex]) -> Self {
        let mut position = vec![Some(0); vertex_count];
        for &v in killed {
            position[v] = None;
        }
        let mut kept = Vec::with_capacity(vertex_count);
        for (v, slot) in position.iter_mut().enumerate() {
            if slot.is_some() {
                *slot = Some(kept.len());
                kept.push(v);
            }
        }
        Self { kept, position }
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }
}

/// Factorization of the Laplacian of `g` restricted to the complement of a
/// killed set (Dirichlet conditions on the set).
#[derive(Debug)]
pub enum LaplacianSolver {
    Dense {
        index: RestrictedIndex,
        factor: Cholesky,
    },
    Sparse {
        index: RestrictedIndex,
        factor: SparseCholesky,
    },
}

impl LaplacianSolver {
    pub fn new(g: &WeightedGraph, killed: &[Vertex]) -> Result<Self, LinalgError> {
        let index = RestrictedIndex::new(g.vertex_count(), killed);
        if index.is_empty() {
            return Err(LinalgError::Empty);
        }
        if index.len() <= DENSE_LIMIT {
            let m = restricted_dense(g, &index);
            Ok(Self::Dense {
                factor: Cholesky::factor(&m)?,
                index,
            })
        } else {
            let mut entries = Vec::new();
            for (i, &y) in index.kept.iter().enumerate() {
                entries.push((i, i, g.total_weight(y)));
                for &(z, id) in g.neighbors(y) {
                    if let Some(j) = index.position[z] {
                        if j < i {
                            entries.push((i, j, -g.edge(id).weight));
                        }
                    }
                }
            }
            Ok(Self::Sparse {
                factor: SparseCholesky::factor(index.len(), &entries)?,
                index,
            })
        }
    }

    pub fn index(&self) -> &RestrictedIndex {
        match self {
            Self::Dense { index, .. } | Self::Sparse { index, .. } => index,
        }
    }

    pub fn dense_factor(&self) -> Option<&Cholesky> {
        match self {
            Self::Dense { factor, .. } => Some(factor),
            Self::Sparse { .. } => None,
        }
    }

    /// Solves in the restricted numbering.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        match self {
            Self::Dense { factor, .. } => factor.solve_in_place(b),
            Self::Sparse { factor, .. } => factor.solve_in_place(b),
        }
    }

    /// Solve followed by iterative refinement with residuals accumulated in
    /// double-double arithmetic; recovers the accuracy lost to poor
    /// conditioning when killing is weak.
    pub fn solve_refined(&self, g: &WeightedGraph, b: &mut [f64]) {
        let rhs = b.to_vec();
        self.solve_in_place(b);
        let index = self.index();
        for _ in 0..2 {
            let mut residual: Vec<f64> = index
                .kept
                .iter()
                .enumerate()
                .map(|(i, &y)| {
                    let mut acc = CompensatedSum::new(rhs[i]);
                    acc.add_product(-g.total_weight(y), b[i]);
                    for &(z, id) in g.neighbors(y) {
                        if let Some(j) = index.position[z] {
                            acc.add_product(g.edge(id).weight, b[j]);
                        }
                    }
                    acc.value()
                })
                .collect();
            self.solve_in_place(&mut residual);
            for (x, d) in b.iter_mut().zip(&residual) {
                *x += d;
            }
        }
    }

    fn approximate_bytes(&self) -> usize {
        let n = self.index().len();
        match self {
            Self::Dense { .. } => n * (n + 1) / 2 * 8,
            // fill-in is unknown from outside; charge a generous constant per row
            Self::Sparse { .. } => n * 8 * 64,
        }
    }
}

/// Dense restricted Laplacian, rows and columns in `index.kept` order.
pub(crate) fn restricted_dense(g: &WeightedGraph, index: &RestrictedIndex) -> SymmetricMatrix {
    let mut m = SymmetricMatrix::zeros(index.len());
    for (i, &y) in index.kept.iter().enumerate() {
        m.add_symmetric(i, i, g.total_weight(y));
        for &(z, id) in g.neighbors(y) {
            if let Some(j) = index.position[z] {
                if j < i {
                    m.add_symmetric(i, j, -g.edge(id).weight);
                }
            }
        }
    }
    m
}

/// Dot-product accumulator carrying the rounding error of every product
/// and sum (error-free transformations).
struct CompensatedSum {
    hi: f64,
    lo: f64,
}

impl CompensatedSum {
    fn new(start: f64) -> Self {
        Self { hi: start, lo: 0.0 }
    }

    fn add_product(&mut self, a: f64, b: f64) {
        let p = a * b;
        let p_err = a.mul_add(b, -p);
        let s = self.hi + p;
        let bb = s - self.hi;
        let s_err = (self.hi - (s - bb)) + (p - bb);
        self.hi = s;
        self.lo += p_err + s_err;
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

type CacheKey = (u64, Vec<Vertex>);

struct SolverCache {
    entries: HashMap<CacheKey, Arc<LaplacianSolver>>,
    bytes: usize,
}

fn cache() -> &'static RwLock<SolverCache> {
    static CACHE: OnceLock<RwLock<SolverCache>> = OnceLock::new();
    CACHE.get_or_init(|| {
        RwLock::new(SolverCache {
            entries: HashMap::new(),
            bytes: 0,
        })
    })
}

/// Shared factorization for `(g, killed)`, computed once and reused.
pub fn cached_solver(
    g: &WeightedGraph,
    killed: &[Vertex],
) -> Result<Arc<LaplacianSolver>, LinalgError> {
    let mut set = killed.to_vec();
    set.sort_unstable();
    set.dedup();
    let key = (g.fingerprint(), set);
    if let Some(hit) = cache().read().unwrap().entries.get(&key) {
        return Ok(Arc::clone(hit));
    }
    let solver = Arc::new(LaplacianSolver::new(g, &key.1)?);
    let bytes = solver.approximate_bytes();
    let mut guard = cache().write().unwrap();
    if guard.bytes + bytes > CACHE_BUDGET_BYTES {
        guard.entries.clear();
        guard.bytes = 0;
    }
    if bytes <= CACHE_BUDGET_BYTES {
        guard.bytes += bytes;
        guard.entries.insert(key, Arc::clone(&solver));
    }
    Ok(solver)
}

pub fn clear_solver_cache() {
    let mut guard = cache().write().unwrap();
    guard.entries.clear();
    guard.bytes = 0;
}
