use super::LinalgError;

/// Dense symmetric matrix in row-major storage (both triangles kept).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Adds `v` at `(i, j)` and, off the diagonal, at `(j, i)`.
    pub fn add_symmetric(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
        if i != j {
            self.data[j * self.n + i] += v;
        }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Principal submatrix on `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Lower Cholesky factor `A = L Lᵀ`, row-major packed rows.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // row i holds L[i][0..=i] starting at i(i+1)/2
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn factor(a: &SymmetricMatrix) -> Result<Self, LinalgError> {
        let n = a.dim();
        if n == 0 {
            return Err(LinalgError::Empty);
        }
        let mut lower = vec![0.0; n * (n + 1) / 2];
        let start = |i: usize| i * (i + 1) / 2;
        for i in 0..n {
            let (done, rest) = lower.split_at_mut(start(i));
            let row_i = &mut rest[..=i];
            for j in 0..=i {
                let row_j = if j == i {
                    None
                } else {
                    Some(&done[start(j)..start(j) + j + 1])
                };
                let mut s = a.get(i, j);
                match row_j {
                    Some(rj) => {
                        for k in 0..j {
                            s -= row_i[k] * rj[k];
                        }
                        row_i[j] = s / rj[j];
                    }
                    None => {
                        for k in 0..i {
                            s -= row_i[k] * row_i[k];
                        }
                        if !(s > 0.0) {
                            return Err(LinalgError::NotPositiveDefinite { pivot: i, value: s });
                        }
                        row_i[i] = s.sqrt();
                    }
                }
            }
        }
        Ok(Self { n, lower })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn l(&self, i: usize, j: usize) -> f64 {
        self.lower[i * (i + 1) / 2 + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        let s = i * (i + 1) / 2;
        &self.lower[s..s + i + 1]
    }

    /// `L y = b` in place.
    pub fn forward_in_place(&self, b: &mut [f64]) {
        for i in 0..self.n {
            let r = self.row(i);
            let s: f64 = r[..i].iter().zip(&b[..i]).map(|(a, c)| a * c).sum();
            b[i] = (b[i] - s) / r[i];
        }
    }

    /// `Lᵀ x = y` in place. Applied to white noise this yields a sample with
    /// covariance `A⁻¹`.
    pub fn backward_in_place(&self, y: &mut [f64]) {
        for i in (0..self.n).rev() {
            y[i] /= self.l(i, i);
            let yi = y[i];
            let r = self.row(i);
            for k in 0..i {
                y[k] -= r[k] * yi;
            }
        }
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.forward_in_place(b);
        self.backward_in_place(b);
    }

    pub fn inverse(&self) -> SymmetricMatrix {
        let n = self.n;
        let mut inv = SymmetricMatrix::zeros(n);
        let mut col = vec![0.0; n];
        for j in 0..n {
            col.iter_mut().for_each(|c| *c = 0.0);
            col[j] = 1.0;
            self.solve_in_place(&mut col);
            for i in 0..n {
                inv.data[i * n + j] = col[i];
            }
        }
        // symmetrize away rounding asymmetry
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (inv.data[i * n + j] + inv.data[j * n + i]);
                inv.data[i * n + j] = v;
                inv.data[j * n + i] = v;
            }
        }
        inv
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.n).map(|i| self.l(i, i).ln()).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverts_two_by_two() {
        let a = SymmetricMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { -1.0 });
        let inv = Cholesky::factor(&a).unwrap().inverse();
        assert!((inv.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((inv.get(0, 1) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn solve_matches_product() {
        let n = 7;
        let a = SymmetricMatrix::from_fn(n, |i, j| {
            if i == j {
                4.0 + i as f64
            } else {
                1.0 / (1.0 + (i + j) as f64)
            }
        });
        let chol = Cholesky::factor(&a).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut b = a.mul_vec(&x);
        chol.solve_in_place(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn indefinite_rejected() {
        let a = SymmetricMatrix::from_fn(2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(matches!(
            Cholesky::factor(&a),
            Err(LinalgError::NotPositiveDefinite { pivot: 1, .. })
        ));
    }
}
