use std::f64::consts::PI;

use crate::graph::{LatticeBox, Vertex};

/// Pointwise Green function of a Dirichlet box without solving a system.
///
/// With `N = side + 1`, the product of path eigenvectors splits as
/// `sin(πm(a+1)/N) sin(πm(b+1)/N) = ½[cos(πm(a−b)/N) − cos(πm(a+b+2)/N)]`,
/// so `g(a, b)` is a signed sum of `2^d` values of the even function
/// `F(u) = (w N^d)⁻¹ Σ_m Π_d cos(π m_d u_d/N) / μ(m)` at
/// `u_d ∈ {|a_d − b_d|, a_d + b_d + 2}`. `F` is tabulated on
/// `[0, 2N − 2]^d` once, by separable cosine transforms.
#[derive(Debug, Clone)]
pub struct BoxGreenTable {
    geometry: LatticeBox,
    extent: usize,
    strides: Vec<usize>,
    values: Vec<f64>,
}

impl BoxGreenTable {
    pub fn new(geometry: LatticeBox) -> Self {
        let n = geometry.side;
        let dim = geometry.dimension;
        let big_n = (n + 1) as f64;
        let extent = 2 * n + 1;
        let eigen: Vec<f64> = (1..=n)
            .map(|k| 2.0 - 2.0 * (PI * k as f64 / big_n).cos())
            .collect();
        let norm = 1.0 / (geometry.weight * big_n.powi(dim as i32));
        let mut current = Vec::with_capacity(n.pow(dim as u32));
        let mut idx = vec![0usize; dim];
        for _ in 0..n.pow(dim as u32) {
            let mu: f64 = idx.iter().map(|&k| eigen[k]).sum();
            current.push(norm / mu);
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < n {
                    break;
                }
                idx[d] = 0;
            }
        }
        // cosine[u * n + m] = cos(π (m+1) u / N)
        let cosine: Vec<f64> = (0..extent * n)
            .map(|um| {
                let (u, m) = (um / n, um % n);
                (PI * ((m + 1) * u) as f64 / big_n).cos()
            })
            .collect();
        let mut shape = vec![n; dim];
        for axis in 0..dim {
            let pre: usize = shape[..axis].iter().product();
            let post: usize = shape[axis + 1..].iter().product();
            let mut next = vec![0.0; pre * extent * post];
            for p in 0..pre {
                let src = &current[p * n * post..(p + 1) * n * post];
                let dst = &mut next[p * extent * post..(p + 1) * extent * post];
                // dst(extent × post) = C(extent × n) · src(n × post)
                unsafe {
                    matrixmultiply::dgemm(
                        extent,
                        n,
                        post,
                        1.0,
                        cosine.as_ptr(),
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
            shape[axis] = extent;
            current = next;
        }
        let mut strides = vec![1; dim];
        for d in (0..dim.saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * extent;
        }
        Self {
            geometry,
            extent,
            strides,
            values: current,
        }
    }

    pub fn geometry(&self) -> &LatticeBox {
        &self.geometry
    }

    pub fn green_coords(&self, x: &[usize], y: &[usize]) -> f64 {
        debug_assert!(x.iter().chain(y).all(|&c| c < self.geometry.side));
        let dim = x.len();
        let mut diff = [0usize; 8];
        let mut sum = [0usize; 8];
        for d in 0..dim {
            diff[d] = x[d].abs_diff(y[d]) * self.strides[d];
            sum[d] = (x[d] + y[d] + 2) * self.strides[d];
        }
        let mut total = 0.0;
        for mask in 0..1usize << dim {
            let mut at = 0;
            for d in 0..dim {
                at += if mask >> d & 1 == 1 { sum[d] } else { diff[d] };
            }
            if mask.count_ones() % 2 == 1 {
                total -= self.values[at];
            } else {
                total += self.values[at];
            }
        }
        debug_assert!(self.extent > 0);
        total
    }

    pub fn green(&self, x: Vertex, y: Vertex) -> f64 {
        self.green_coords(&self.geometry.coords(x), &self.geometry.coords(y))
    }
}
