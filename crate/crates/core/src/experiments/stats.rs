use super::ExperimentError;

/// Normal quantile of a two-sided 95% interval.
pub const Z95: f64 = 1.959963984540054;

/// Wilson score interval for `count` successes out of `total` at normal
/// quantile `z`.
pub fn wilson(count: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = count as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if count == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if count == total { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Binomial standard deviation of a frequency under the reference `p`.
pub fn binomial_sigma(p: f64, total: u64) -> f64 {
    (p * (1.0 - p) / total as f64).sqrt()
}

/// `(estimate − p) / σ(p)`; zero when both coincide at a degenerate `p`.
pub fn binomial_z(count: u64, total: u64, p: f64) -> f64 {
    let diff = count as f64 / total as f64 - p;
    let sigma = binomial_sigma(p, total);
    if sigma == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY.copysign(diff)
        }
    } else {
        diff / sigma
    }
}

/// Weighted least squares slope of `log p̂` against `log x`, each point
/// weighted by the delta-method variance `(σ/p̂)²`.
///
/// The returned standard error is inflated by `√(χ²/dof)` when the scatter
/// exceeds what the weights account for.
pub fn fit_loglog(points: &[(f64, f64, f64)]) -> Result<(f64, f64), ExperimentError> {
    if points.len() < 3 {
        return Err(ExperimentError::Fit(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut rows = Vec::with_capacity(points.len());
    for &(x, p, sigma) in points {
        if !(x > 0.0 && p > 0.0 && sigma > 0.0) || !(x.is_finite() && p.is_finite()) {
            return Err(ExperimentError::Fit(format!(
                "point ({x}, {p}, {sigma}) is not strictly positive"
            )));
        }
        let rel = sigma / p;
        rows.push((x.ln(), p.ln(), 1.0 / (rel * rel)));
    }
    let sw: f64 = rows.iter().map(|r| r.2).sum();
    let mx = rows.iter().map(|r| r.2 * r.0).sum::<f64>() / sw;
    let my = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / sw;
    let sxx: f64 = rows.iter().map(|r| r.2 * (r.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ExperimentError::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = rows.iter().map(|r| r.2 * (r.0 - mx) * (r.1 - my)).sum();
    let slope = sxy / sxx;
    let chi2: f64 = rows
        .iter()
        .map(|r| r.2 * (r.1 - my - slope * (r.0 - mx)).powi(2))
        .sum();
    let dof = (rows.len() - 2) as f64;
    let scale = (chi2 / dof).max(1.0);
    Ok((slope, (scale / sxx).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::Binomial;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&x: &f64| (x, x.powf(-0.5), 0.01))
            .collect();
        let (slope, _) = fit_loglog(&pts).unwrap();
        assert!((slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog(&[(1.0, 0.5, 0.1), (2.0, 0.3, 0.1)]).is_err());
        assert!(fit_loglog(&[(1.0, 0.5, 0.1), (2.0, 0.0, 0.1), (3.0, 0.2, 0.1)]).is_err());
        assert!(fit_loglog(&[(1.0, 0.5, 0.1), (1.0, 0.4, 0.1), (1.0, 0.2, 0.1)]).is_err());
    }

    #[test]
    fn interval_coverage_of_noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let xs = [4.0f64, 8.0, 16.0, 24.0];
        let n = 10_000u64;
        let mut covered = 0;
        for _ in 0..1000 {
            let pts: Vec<_> = xs
                .iter()
                .map(|&x| {
                    let p = 0.8 * x.powf(-0.5);
                    let k = rng.sample(Binomial::new(n, p).unwrap());
                    let ph = k as f64 / n as f64;
                    (x, ph, binomial_sigma(ph, n))
                })
                .collect();
            let (slope, se) = fit_loglog(&pts).unwrap();
            if (slope + 0.5).abs() <= 2.0 * se {
                covered += 1;
            }
        }
        assert!(covered >= 950, "coverage {covered}/1000");
    }

    #[test]
    fn wilson_known_values() {
        let (lo, hi) = wilson(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.277_532).abs() < 1e-5);
        let (lo, hi) = wilson(50, 100, Z95);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn wilson_contains_estimate(total in 1u64..100_000, frac in 0.0f64..=1.0) {
            let count = ((total as f64) * frac).floor() as u64;
            let (lo, hi) = wilson(count, total, Z95);
            let p = count as f64 / total as f64;
            prop_assert!(lo <= p + 1e-15 && p <= hi + 1e-15);
            prop_assert!(0.0 <= lo && hi <= 1.0);
        }
    }
}
