use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Side};

use super::LinalgError;

/// Sparse `L Lᵀ` factorization of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
}

impl SparseCholesky {
    /// Factors the matrix given by its lower-triangle entries `(row, col, value)`
    /// with `row >= col`; repeated entries are summed.
    pub fn factor(n: usize, lower: &[(usize, usize, f64)]) -> Result<Self, LinalgError> {
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        faer::set_global_parallelism(faer::Par::Seq);
        let triplets: Vec<_> = lower
            .iter()
            .map(|&(r, c, v)| Triplet::new(r.max(c), r.min(c), v))
            .collect();
        let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
            .map_err(|e| LinalgError::Sparse(format!("{e:?}")))?;
        let llt = mat
            .sp_cholesky(Side::Lower)
            .map_err(|e| LinalgError::Sparse(e.to_string()))?;
        Ok(Self { n, llt })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let rhs = MatMut::from_column_major_slice_mut(b, self.n, 1);
        self.llt.solve_in_place(rhs);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_laplacian_solve() {
        // tridiagonal 2, -1 on a path of 50 with Dirichlet ends
        let n = 50;
        let mut entries = Vec::new();
        for i in 0..n {
            entries.push((i, i, 2.0));
            if i + 1 < n {
                entries.push((i + 1, i, -1.0));
            }
        }
        let chol = SparseCholesky::factor(n, &entries).unwrap();
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        chol.solve_in_place(&mut b);
        // first column of the inverse: (n - i) / (n + 1)
        for (i, v) in b.iter().enumerate() {
            assert!((v - (n - i) as f64 / (n + 1) as f64).abs() < 1e-12);
        }
    }
}
