//! Exact reference laws for the level-set cluster at level 0 and the
//! capacity of conditioned clusters.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulaError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("arcsin argument {0} exceeds 1")]
    ArgumentAboveOne(f64),
    #[error("inputs violate g(0,x)^2 <= g(0) g(x): {g0x}^2 > {g00} * {gxx}")]
    CauchySchwarz { g00: f64, gxx: f64, g0x: f64 },
    #[error("dimension {0} is not transient (need alpha > 2)")]
    Recurrent(f64),
}

const PROBABILITY_SLACK: f64 = 1e-12;

/// Clamps to `[0, 1]` after asserting the raw value is within rounding of it.
pub fn clamp_probability(raw: f64) -> f64 {
    assert!(
        (-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&raw),
        "probability {raw} outside [0, 1] beyond rounding"
    );
    raw.clamp(0.0, 1.0)
}

fn positive(name: &'static str, value: f64) -> Result<f64, FormulaError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(FormulaError::NonPositive { name, value })
    }
}

/// `P(g_{0}(x) − g_{K⁰}(x) ≥ t) = (1/π) arctan(g(0,x) / √(t g(0)))`.
pub fn lupu_arctan(g00: f64, g0x: f64, t: f64) -> Result<f64, FormulaError> {
    positive("t", t)?;
    positive("g(0)", g00)?;
    if g0x < 0.0 {
        return Err(FormulaError::NonPositive {
            name: "g(0,x)",
            value: g0x,
        });
    }
    Ok(clamp_probability((g0x / (t * g00).sqrt()).atan() / PI))
}

/// `P(g(x) − g_{K⁰}(x) ≥ s) = (1/π) arcsin(g(0,x) / √(s g(0)))`.
pub fn lupu_arcsin(g00: f64, g0x: f64, s: f64) -> Result<f64, FormulaError> {
    positive("s", s)?;
    positive("g(0)", g00)?;
    let arg = g0x / (s * g00).sqrt();
    if arg > 1.0 + PROBABILITY_SLACK {
        return Err(FormulaError::ArgumentAboveOne(arg));
    }
    if arg < 0.0 {
        return Err(FormulaError::NonPositive {
            name: "g(0,x)",
            value: g0x,
        });
    }
    Ok(clamp_probability(arg.min(1.0).asin() / PI))
}

/// `P(0 ↔ x in K⁰) = (1/π) arcsin(g(0,x) / √(g(0) g(x)))`.
pub fn two_point(g00: f64, gxx: f64, g0x: f64) -> Result<f64, FormulaError> {
    positive("g(0)", g00)?;
    positive("g(x)", gxx)?;
    if g0x * g0x > g00 * gxx * (1.0 + PROBABILITY_SLACK) {
        return Err(FormulaError::CauchySchwarz { g00, gxx, g0x });
    }
    lupu_arcsin(g00, g0x, gxx)
}

/// Lower edge `h(0)² / g_{x}(0)` of the support of the conditioned capacity law.
pub fn cap_support_edge(g0_killed_x: f64, h0: f64) -> f64 {
    h0 * h0 / g0_killed_x
}

/// Density in `u` of the capacity of the level `−t` cluster after
/// conditioning on hitting `x`:
/// `1/(2πu√(u/β − 1)) e^{−t²u/2}` for `u > β = h(0)²/g_{x}(0)`, else 0.
pub fn cap_transform_density(u: f64, t: f64, g0_killed_x: f64, h0: f64) -> f64 {
    let beta = cap_support_edge(g0_killed_x, h0);
    if !(u > beta) {
        return 0.0;
    }
    (-t * t * u / 2.0).exp() / (2.0 * PI * u * (u / beta - 1.0).sqrt())
}

/// Mass of the conditioned capacity law on `[lo, hi]` (`hi` may be infinite).
///
/// Integrates in `θ` with `u = β sec²θ`, which removes the inverse square
/// root at the support edge: the mass element becomes
/// `(1/π) exp(−t²β / (2cos²θ)) dθ`.
pub fn cap_transform_mass(lo: f64, hi: f64, t: f64, g0_killed_x: f64, h0: f64) -> f64 {
    let beta = cap_support_edge(g0_killed_x, h0);
    let angle = |u: f64| {
        if u <= beta {
            0.0
        } else if u.is_infinite() {
            PI / 2.0
        } else {
            (beta / u).sqrt().acos()
        }
    };
    let (a, b) = (angle(lo), angle(hi));
    if b <= a {
        return 0.0;
    }
    let c = t * t * beta / 2.0;
    let f = |theta: f64| {
        let cos = theta.cos();
        if cos <= 0.0 {
            0.0
        } else {
            (-c / (cos * cos)).exp() / PI
        }
    };
    integrate(f, a, b, 1e-10)
}

/// `P(cap(K⁰) > u)` for the level-0 cable cluster of a vertex with Green
/// value `g(0)`: `(1/π) arctan(1/√(u g(0) − 1))` above `1/g(0)`, and the
/// nonempty probability 1/2 below.
pub fn cable_capacity_survival(u: f64, g00: f64) -> f64 {
    let edge = 1.0 / g00;
    if u <= edge {
        return 0.5;
    }
    clamp_probability((1.0 / (u * g00 - 1.0).sqrt()).atan() / PI)
}

/// Adaptive Simpson quadrature to relative tolerance `rel_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(fa, fm, fb, a, b);
    // coarse pass fixes the scale for the relative tolerance
    let coarse = recurse(&f, a, b, fa, fm, fb, whole, 1e-3 * whole.abs().max(1e-300), 12);
    let tol = rel_tol * coarse.abs().max(1e-300);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 48)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentReferences {
    /// Exponent of `P(cap(K⁰) > t)` in `t`.
    pub cap_tail_exponent: f64,
    /// Green decay exponent `ν = α − 2` of the lattice `ℤ^α`.
    pub nu: f64,
    /// Exponent `−ν/2` of the one-arm probability in `R`.
    pub one_arm_exponent: f64,
}

pub fn exponent_references(alpha: f64) -> Result<ExponentReferences, FormulaError> {
    if !(alpha > 2.0) {
        return Err(FormulaError::Recurrent(alpha));
    }
    let nu = alpha - 2.0;
    Ok(ExponentReferences {
        cap_tail_exponent: -0.5,
        nu,
        one_arm_exponent: -nu / 2.0,
    })
}
