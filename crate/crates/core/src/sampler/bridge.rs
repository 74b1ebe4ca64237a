//! First passage of a Brownian bridge through a level.
//!
//! Along a cable of conductance `λ` the field is a Brownian bridge of
//! duration `T = 1/λ` between the endpoint values. For a bridge from height
//! `p > 0` to height `q ≤ 0` above the level, the first hitting time `τ`
//! satisfies `τ/(T − τ) ~ IG(p/|q|, p²/T)`; for `q = 0` the ratio is Lévy
//! distributed with scale `p²/T`. A bridge from `p` to `q > 0` conditioned to
//! hit the level has the law of the bridge from `p` to `-q` up to that time.

use rand::Rng;
use rand_distr::StandardNormal;

/// Outcome of running a bridge until it first meets the level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BridgeHit {
    /// Hits at this fraction of the cable length, measured from the start.
    At(f64),
    /// Stays strictly above the level for the whole duration.
    Never,
}

/// Inverse Gaussian draw by the transformation with multiple roots. The
/// larger root is formed from positive terms only and the smaller one as
/// `mean²/larger`, which stays accurate when `mean/shape` is huge. An
/// infinite mean gives the Lévy limit `shape/Z²`.
pub fn inverse_gaussian<R: Rng + ?Sized>(mean: f64, shape: f64, rng: &mut R) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let v = z * z;
    if !mean.is_finite() || mean > 1e150 {
        return shape / v;
    }
    let mv = mean * v;
    let larger = mean + mean * mv / (2.0 * shape)
        + mean / (2.0 * shape) * (4.0 * mean * shape * v + mv * mv).sqrt();
    let smaller = mean * mean / larger;
    let u: f64 = rng.random();
    if u * (mean + smaller) <= mean {
        smaller
    } else {
        larger
    }
}

/// Fraction of the duration at which a bridge from `p > 0` to `q` (heights
/// above the level) first hits it, given that it does. `duration` is `1/λ`.
pub fn first_hit_fraction<R: Rng + ?Sized>(p: f64, q: f64, duration: f64, rng: &mut R) -> f64 {
    debug_assert!(p >= 0.0);
    if p == 0.0 {
        return 0.0;
    }
    let mean = if q == 0.0 { f64::INFINITY } else { p / q.abs() };
    let ratio = inverse_gaussian(mean, p * p / duration, rng);
    if ratio.is_infinite() {
        1.0
    } else {
        ratio / (1.0 + ratio)
    }
}

/// Runs a bridge from `p > 0` to `q` for `duration`, deciding first whether
/// it hits the level at all.
pub fn bridge_hit<R: Rng + ?Sized>(p: f64, q: f64, duration: f64, rng: &mut R) -> BridgeHit {
    if q > 0.0 {
        let hit = (-2.0 * p * q / duration).exp();
        let u: f64 = rng.random();
        if u >= hit {
            return BridgeHit::Never;
        }
    }
    BridgeHit::At(first_hit_fraction(p, q, duration, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_forms::integrate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Density of the first hitting time from the path decomposition at `τ`:
    /// first-passage density of 0 from `p` times the transition from 0 to `q`
    /// over the remaining time, normalised by the bridge endpoint density.
    fn hit_density(tau: f64, rest: f64, p: f64, q: f64, t: f64) -> f64 {
        let heat = |x: f64, s: f64| (-x * x / (2.0 * s)).exp() / (2.0 * PI * s).sqrt();
        if p * p / (2.0 * tau) > 700.0 {
            return 0.0;
        }
        let first = p / (2.0 * PI * tau.powi(3)).sqrt() * (-p * p / (2.0 * tau)).exp();
        first * heat(q, rest) / heat(q - p, t)
    }

    fn empirical_mean(p: f64, q: f64, t: f64, n: usize) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws: Vec<f64> = (0..n).map(|_| first_hit_fraction(p, q, t, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (mean, (var / n as f64).sqrt())
    }

    /// `∫₀ᵗ φ(τ/t) density(τ) dτ` with `τ = t(1 − w²)`, which removes the
    /// inverse square root at `τ = t` when `q = 0`.
    fn hit_moment(phi: impl Fn(f64) -> f64, p: f64, q: f64, t: f64) -> f64 {
        integrate(
            |w| {
                let tau = t * (1.0 - w * w);
                if tau <= 0.0 || w <= 0.0 {
                    return 0.0;
                }
                phi(tau / t) * hit_density(tau, t * w * w, p, q, t) * 2.0 * t * w
            },
            0.0,
            1.0,
            1e-10,
        )
    }

    #[test]
    fn hit_fraction_mean_matches_path_decomposition() {
        for (p, q, t) in [(1.0, -1.0, 1.0), (0.3, -2.0, 0.5), (1.5, -0.2, 2.0), (0.8, 0.0, 1.0)] {
            let mass = hit_moment(|_| 1.0, p, q, t);
            assert!((mass - 1.0).abs() < 1e-6, "mass {mass}");
            let oracle = hit_moment(|f| f, p, q, t);
            let (mean, se) = empirical_mean(p, q, t, 200_000);
            assert!((mean - oracle).abs() < 4.0 * se, "{p} {q}: {mean} vs {oracle}");
        }
    }

    #[test]
    fn inverse_gaussian_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mean, shape) = (2.0, 5.0);
        let n = 400_000;
        let draws: Vec<f64> = (0..n).map(|_| inverse_gaussian(mean, shape, &mut rng)).collect();
        let m = draws.iter().sum::<f64>() / n as f64;
        let v = draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
        let true_var = mean.powi(3) / shape;
        assert!((m - mean).abs() < 4.0 * (true_var / n as f64).sqrt());
        assert!((v - true_var).abs() / true_var < 0.05);
        // huge mean ratio stays finite and positive
        let x = inverse_gaussian(1e12, 1e-3, &mut rng);
        assert!(x.is_finite() && x > 0.0);
    }

    #[test]
    fn hit_probability_for_bridge_above_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let (p, q, t) = (0.7, 0.4, 1.0);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| matches!(bridge_hit(p, q, t, &mut rng), BridgeHit::At(_)))
            .count();
        let expected = (-2.0 * p * q / t).exp();
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((hits as f64 / n as f64 - expected).abs() < 4.0 * se);
    }
}
