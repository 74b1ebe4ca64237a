use super::LinalgError;

#[derive(Debug, Clone, Copy)]
pub struct CgSettings {
    /// Stop when `‖r‖ ≤ tolerance · ‖b‖`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Optional early exit once `bᵀx` exceeds this value. With `x₀ = 0`,
    /// `bᵀx_k` increases monotonically toward `bᵀA⁻¹b`, so crossing the
    /// threshold certifies the limit also exceeds it.
    pub stop_above: Option<f64>,
}

impl Default for CgSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 20_000,
            stop_above: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    /// Terminated through `stop_above`.
    pub exceeded: bool,
}

/// Preconditioned conjugate gradients for `A x = b` with `A` symmetric
/// positive definite, starting from `x = 0`. `apply(v, out)` writes `A v`;
/// `precondition(r, out)` writes an approximation of `A⁻¹ r`.
pub fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    mut precondition: impl FnMut(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    settings: CgSettings,
) -> Result<CgOutcome, LinalgError> {
    let n = b.len();
    if x.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    x.iter_mut().for_each(|v| *v = 0.0);
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: 0.0,
            exceeded: false,
        });
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut bx = 0.0;
    for it in 1..=settings.max_iterations {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rz / pap;
        let mut rr = 0.0;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            rr += r[i] * r[i];
        }
        let rel = rr.sqrt() / norm_b;
        if rel <= settings.tolerance {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: rel,
                exceeded: false,
            });
        }
        if let Some(limit) = settings.stop_above {
            // bᵀx grows by alpha · bᵀp = alpha · rz at each step
            bx += alpha * rz;
            if bx > limit {
                return Ok(CgOutcome {
                    iterations: it,
                    relative_residual: rel,
                    exceeded: true,
                });
            }
        }
        precondition(&r, &mut z);
        let rz_next: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let rel = r.iter().map(|v| v * v).sum::<f64>().sqrt() / norm_b;
    Err(LinalgError::NoConvergence {
        iterations: settings.max_iterations,
        residual: rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Cholesky, SymmetricMatrix};

    fn test_matrix(n: usize) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(n, |i, j| {
            if i == j {
                2.5
            } else if i.abs_diff(j) == 1 {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn matches_direct_solve() {
        let n = 40;
        let a = test_matrix(n);
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
        let mut x = vec![0.0; n];
        let out = conjugate_gradient(
            |v, o| o.copy_from_slice(&a.mul_vec(v)),
            |r, z| z.iter_mut().zip(r).for_each(|(z, r)| *z = r / 2.5),
            &b,
            &mut x,
            CgSettings::default(),
        )
        .unwrap();
        assert!(!out.exceeded);
        let mut direct = b.clone();
        Cholesky::factor(&a).unwrap().solve_in_place(&mut direct);
        for (u, v) in x.iter().zip(&direct) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn lower_bound_exit() {
        let n = 40;
        let a = test_matrix(n);
        let b = vec![1.0; n];
        let mut direct = b.clone();
        Cholesky::factor(&a).unwrap().solve_in_place(&mut direct);
        let total: f64 = direct.iter().sum();
        let mut x = vec![0.0; n];
        let out = conjugate_gradient(
            |v, o| o.copy_from_slice(&a.mul_vec(v)),
            |r, z| z.copy_from_slice(r),
            &b,
            &mut x,
            CgSettings {
                stop_above: Some(0.5 * total),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(out.exceeded);
        let partial: f64 = x.iter().sum();
        assert!(partial > 0.5 * total && partial <= total * (1.0 + 1e-12));
    }
}
