//! Kolmogorov-Smirnov statistics: one-sample against an analytic CDF and
//! two-sample between empirical laws.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Asymptotic 1%-level threshold constant: reject when `D > 1.63/sqrt(n)`.
pub const KS_CRIT_1PCT: f64 = 1.63;

/// `sup |F̂_n(x) - F(x)|` over the sample points, both one-sided parts.
pub fn ks_distance_1d<T: Scalar, F: Fn(T) -> T>(samples: &[T], cdf: F) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::Precondition("KS of an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = T::of(sorted.len() as f64);
    let mut d = T::zero();
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let hi = (T::of((i + 1) as f64) / n - f).abs();
        let lo = (f - T::of(i as f64) / n).abs();
        d = d.max(hi).max(lo);
    }
    Ok(d)
}

/// Two-sample KS: `sup |F̂_n - Ĝ_m|`, ties handled by advancing both
/// empirical CDFs through the tied value before comparing.
pub fn ks_distance_two_sample<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Precondition("KS of an empty sample".into()));
    }
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_by(|p, q| p.partial_cmp(q).expect("finite samples"));
    b.sort_by(|p, q| p.partial_cmp(q).expect("finite samples"));
    let (n, m) = (T::of(a.len() as f64), T::of(b.len() as f64));
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = T::zero();
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        let diff = (T::of(i as f64) / n - T::of(j as f64) / m).abs();
        d = d.max(diff);
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn point_mass_against_continuous_cdf() {
        // All mass at 0.3 against the uniform CDF: D = max(F, 1-F) = 0.7.
        let samples = vec![0.3f64; 100];
        let d = ks_distance_1d(&samples, |x: f64| x.clamp(0.0, 1.0)).unwrap();
        assert_relative_eq!(d, 0.7, max_relative = 1e-12);
    }

    #[test]
    fn uniform_draws_pass_at_one_percent() {
        let n = 10_000usize;
        let samples: Vec<f64> = (0..n)
            .map(|i| crate::sim::rng::uniform(2718, i as u64, 0, 0))
            .collect();
        let d = ks_distance_1d(&samples, |x: f64| x.clamp(0.0, 1.0)).unwrap();
        assert!(d < KS_CRIT_1PCT / (n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn shifted_sample_detects_the_gap() {
        // Uniform(0,1) samples shifted by +0.5 against the uniform CDF:
        // the sup gap tends to 0.5.
        let n = 20_000usize;
        let samples: Vec<f64> = (0..n)
            .map(|i| crate::sim::rng::uniform(163, i as u64, 0, 0) + 0.5)
            .collect();
        let d = ks_distance_1d(&samples, |x: f64| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.5).abs() < 0.02, "D = {d}");
    }

    #[test]
    fn two_sample_examples() {
        assert_relative_eq!(
            ks_distance_two_sample(&[1.0, 1.0, 4.0, 4.0], &[1.0, 1.0, 1.0, 4.0]).unwrap(),
            0.25
        );
        let xs = vec![0.42, 0.24, 0.86, 0.85, 0.82, 0.82, 0.25, 0.78, 0.13, 0.27];
        let ys = vec![0.24, 0.27, 0.87, 0.29, 0.57, 0.44, 0.5, 0.0, 0.56, 0.03];
        assert_relative_eq!(ks_distance_two_sample(&xs, &ys).unwrap(), 0.4);
        // Same multiset in different order: zero.
        assert_eq!(
            ks_distance_two_sample(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(),
            0.0
        );
    }
}
