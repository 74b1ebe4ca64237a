use std::f64::consts::PI;

use crate::graph::LatticeBox;

/// Sub-box `[lo_d, lo_d + len_d)` of a lattice box, one range per axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub lo: Vec<usize>,
    pub len: Vec<usize>,
}

impl Window {
    pub fn full(dimension: usize, side: usize) -> Self {
        Self {
            lo: vec![0; dimension],
            len: vec![side; dimension],
        }
    }

    /// Cube of half-width `radius` around `center`, clipped to the box.
    pub fn around(geometry: &LatticeBox, center: &[usize], radius: usize) -> Self {
        let mut lo = Vec::with_capacity(center.len());
        let mut len = Vec::with_capacity(center.len());
        for &c in center {
            let a = c.saturating_sub(radius);
            let b = (c + radius + 1).min(geometry.side);
            lo.push(a);
            len.push(b - a);
        }
        Self { lo, len }
    }

    pub fn volume(&self) -> usize {
        self.len.iter().product()
    }

    /// Row-major index inside the window of box coordinates `coords`.
    pub fn local_index(&self, coords: &[usize]) -> Option<usize> {
        let mut idx = 0;
        for ((&c, &lo), &len) in coords.iter().zip(&self.lo).zip(&self.len) {
            if c < lo || c >= lo + len {
                return None;
            }
            idx = idx * len + (c - lo);
        }
        Some(idx)
    }

    pub fn coords(&self, mut local: usize) -> Vec<usize> {
        let mut c = vec![0; self.len.len()];
        for d in (0..self.len.len()).rev() {
            c[d] = self.lo[d] + local % self.len[d];
            local /= self.len[d];
        }
        c
    }
}

/// Exact diagonalization of the Dirichlet box Laplacian
/// `L = w Σ_d (I ⊗ … ⊗ T ⊗ … ⊗ I)` with `T` the path matrix `tridiag(-1, 2, -1)`.
///
/// The orthonormal sine basis `S_jk = √(2/(n+1)) sin(π (j+1)(k+1)/(n+1))`
/// is symmetric, so `L⁻¹ = S^{⊗d} Λ⁻¹ S^{⊗d}` and `S^{⊗d} Λ^{-1/2} z`
/// with white noise `z` has covariance `L⁻¹`. Transforms run axis by axis
/// as matrix products.
#[derive(Debug, Clone)]
pub struct BoxSpectral {
    geometry: LatticeBox,
    sine: Vec<f64>,
    eigen_1d: Vec<f64>,
    inv_sqrt_eigen: Vec<f64>,
}

impl BoxSpectral {
    pub fn new(geometry: LatticeBox) -> Self {
        let n = geometry.side;
        let scale = (2.0 / (n + 1) as f64).sqrt();
        let mut sine = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                sine[j * n + k] =
                    scale * (PI * ((j + 1) * (k + 1)) as f64 / (n + 1) as f64).sin();
            }
        }
        let eigen_1d: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (PI * (k + 1) as f64 / (n + 1) as f64).cos())
            .collect();
        let total = geometry.len();
        let mut inv_sqrt_eigen = Vec::with_capacity(total);
        let mut idx = vec![0usize; geometry.dimension];
        for _ in 0..total {
            let mu: f64 = idx.iter().map(|&k| eigen_1d[k]).sum::<f64>() * geometry.weight;
            inv_sqrt_eigen.push(1.0 / mu.sqrt());
            for d in (0..geometry.dimension).rev() {
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
            }
        }
        Self {
            geometry,
            sine,
            eigen_1d,
            inv_sqrt_eigen,
        }
    }

    pub fn geometry(&self) -> &LatticeBox {
        &self.geometry
    }

    /// One-dimensional path eigenvalues `2 - 2 cos(π k/(n+1))`, `k = 1..n`.
    pub fn path_eigenvalues(&self) -> &[f64] {
        &self.eigen_1d
    }

    pub fn sine_matrix(&self) -> &[f64] {
        &self.sine
    }

    /// Applies `S` along every axis, keeping only `window` of the output.
    fn transform(&self, input: &[f64], window: &Window) -> Vec<f64> {
        let n = self.geometry.side;
        let dim = self.geometry.dimension;
        let mut current = input.to_vec();
        // shape so far: window lengths on processed axes, n on the rest
        let mut shape = vec![n; dim];
        for axis in 0..dim {
            let pre: usize = shape[..axis].iter().product();
            let post: usize = shape[axis + 1..].iter().product();
            let out_len = window.len[axis];
            let rows = &self.sine[window.lo[axis] * n..];
            let mut next = vec![0.0; pre * out_len * post];
            if post == 1 {
                // last axis: next(pre × out_len) = current(pre × n) · S[lo.., :]ᵀ
                unsafe {
                    matrixmultiply::dgemm(
                        pre,
                        n,
                        out_len,
                        1.0,
                        current.as_ptr(),
                        n as isize,
                        1,
                        rows.as_ptr(),
                        1,
                        n as isize,
                        0.0,
                        next.as_mut_ptr(),
                        out_len as isize,
                        1,
                    );
                }
                shape[axis] = out_len;
                current = next;
                continue;
            }
            for p in 0..pre {
                let src = &current[p * n * post..(p + 1) * n * post];
                let dst = &mut next[p * out_len * post..(p + 1) * out_len * post];
                // dst(out_len × post) = S[lo.., :](out_len × n) · src(n × post)
                unsafe {
                    matrixmultiply::dgemm(
                        out_len,
                        n,
                        post,
                        1.0,
                        rows.as_ptr(),
                        n as isize,
                        1,
                        src.as_ptr(),
                        post as isize,
                        1,
                        0.0,
                        dst.as_mut_ptr(),
                        post as isize,
                        1,
                    );
                }
            }
            shape[axis] = out_len;
            current = next;
        }
        current
    }

    /// Field with covariance `L⁻¹` from white noise `z` (length = box volume),
    /// restricted to `window`.
    pub fn sample(&self, z: &[f64], window: &Window) -> Vec<f64> {
        assert_eq!(z.len(), self.geometry.len());
        let scaled: Vec<f64> = z
            .iter()
            .zip(&self.inv_sqrt_eigen)
            .map(|(a, b)| a * b)
            .collect();
        self.transform(&scaled, window)
    }

    /// `L⁻¹ b` on the full box.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let full = Window::full(self.geometry.dimension, self.geometry.side);
        let mut spec = self.transform(b, &full);
        for (v, s) in spec.iter_mut().zip(&self.inv_sqrt_eigen) {
            *v *= s * s;
        }
        self.transform(&spec, &full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_lattice_box;
    use crate::potential::green;

    #[test]
    fn solve_matches_dense_green() {
        for (dim, side) in [(2, 5), (3, 4)] {
            let g = build_lattice_box(dim, side, 1.5).unwrap();
            let spec = BoxSpectral::new(*g.lattice().unwrap());
            let gm = green(&g, &[]).unwrap();
            let n = g.vertex_count();
            for col in [0, n / 2, n - 1] {
                let mut e = vec![0.0; n];
                e[col] = 1.0;
                let x = spec.solve(&e);
                for row in 0..n {
                    assert!((x[row] - gm.get(row, col)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn windowed_sample_is_a_restriction() {
        let g = build_lattice_box(3, 6, 1.0).unwrap();
        let geo = *g.lattice().unwrap();
        let spec = BoxSpectral::new(geo);
        let z: Vec<f64> = (0..geo.len()).map(|i| ((i * 37 % 11) as f64) - 5.0).collect();
        let full = spec.sample(&z, &Window::full(3, 6));
        let w = Window::around(&geo, &[3, 3, 2], 1);
        let part = spec.sample(&z, &w);
        assert_eq!(part.len(), w.volume());
        for (local, v) in part.iter().enumerate() {
            let c = w.coords(local);
            assert!((v - full[geo.vertex(&c)]).abs() < 1e-12);
            assert_eq!(w.local_index(&c), Some(local));
        }
    }
}
