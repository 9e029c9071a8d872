//! Normalized histograms in one or two dimensions, with underflow and
//! overflow bins included in the normalization, plus the discretized total
//! variation distance between histograms on a common grid.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram<T> {
    edges: Vec<Vec<T>>,
    mass: Vec<T>,
    n_samples: usize,
}

impl<T: Scalar> Histogram<T> {
    pub fn dims(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Vec<T>] {
        &self.edges
    }

    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    /// Bins per axis, including the two out-of-range bins.
    pub fn bins_per_dim(&self) -> Vec<usize> {
        self.edges.iter().map(|e| e.len() + 1).collect()
    }
}

/// Bins `samples` on the given per-dimension edges (1 or 2 dimensions).
/// Out-of-range samples land in underflow/overflow bins, so the masses
/// always sum to one.
pub fn empirical_histogram<T: Scalar>(
    samples: &[Vec<T>],
    edges: &[Vec<T>],
) -> Result<Histogram<T>> {
    if samples.is_empty() {
        return Err(Error::Precondition("histogram of an empty sample".into()));
    }
    let dims = edges.len();
    if dims == 0 || dims > 2 {
        return Err(Error::Config(
            "histograms support one or two dimensions".into(),
        ));
    }
    for e in edges {
        if e.len() < 2 || e.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config(
                "edges must be sorted strictly increasing, length >= 2".into(),
            ));
        }
    }
    let bins: Vec<usize> = edges.iter().map(|e| e.len() + 1).collect();
    let total: usize = bins.iter().product();
    let mut counts = vec![0usize; total];
    for row in samples {
        if row.len() != dims {
            return Err(Error::Config("sample dimension mismatch".into()));
        }
        let mut flat = 0usize;
        for (k, &v) in row.iter().enumerate() {
            let idx = edges[k].partition_point(|&e| e <= v);
            flat = flat * bins[k] + idx;
        }
        counts[flat] += 1;
    }
    let n = samples.len();
    let nf = T::of(n as f64);
    let mass = counts.iter().map(|&c| T::of(c as f64) / nf).collect();
    Ok(Histogram {
        edges: edges.to_vec(),
        mass,
        n_samples: n,
    })
}

/// `½ Σ |p - q|` over the common grid; a metric on histograms with
/// identical edges, valued in `[0, 1]`.
pub fn tv_distance<T: Scalar>(p: &Histogram<T>, q: &Histogram<T>) -> Result<T> {
    if p.edges != q.edges {
        return Err(Error::Precondition(
            "total variation requires identical histogram edges".into(),
        ));
    }
    let half = T::of(0.5);
    let sum = p
        .mass
        .iter()
        .zip(&q.mass)
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
    Ok(half * sum)
}

/// Freedman-Diaconis bin edges for a 1-d sample: width `2·IQR·n^{-1/3}`,
/// bin count capped at `max_bins`. Degenerate samples fall back to a
/// single unit-width bin; zero IQR falls back to eight bins.
pub fn freedman_diaconis_edges<T: Scalar>(values: &[T], max_bins: usize) -> Result<Vec<T>> {
    if values.is_empty() || max_bins == 0 {
        return Err(Error::Precondition("edges of an empty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite samples"));
    let n = sorted.len();
    let quantile = |p: f64| -> T {
        let pos = p * (n - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let frac = T::of(pos - lo as f64);
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    };
    let min = sorted[0];
    let max = sorted[n - 1];
    if !(max > min) {
        let half = T::of(0.5);
        return Ok(vec![min - half, min + half]);
    }
    let iqr = quantile(0.75) - quantile(0.25);
    let width = T::of(2.0) * iqr * T::of((n as f64).powf(-1.0 / 3.0));
    let bins = if width > T::zero() {
        ((max - min) / width).ceil().as_f64() as usize
    } else {
        8
    }
    .clamp(1, max_bins);
    let step = (max - min) / T::of(bins as f64);
    let mut edges = Vec::with_capacity(bins + 1);
    for k in 0..=bins {
        edges.push(min + step * T::of(k as f64));
    }
    Ok(edges)
}
