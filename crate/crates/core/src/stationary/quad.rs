//! Gauss-Legendre quadrature and a tabulated CDF evaluator.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Gauss-Legendre rule on `[-1, 1]`. Nodes are the Legendre roots found by
/// Newton iteration from the Chebyshev-like initial guess; weights are
/// `2 / ((1-x²) P'ₙ(x)²)`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("quadrature needs at least one node".into()));
        }
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let pi = T::of(std::f64::consts::PI);
        let nf = T::of(n as f64);
        let tol = T::epsilon() * T::of(4.0);
        for k in 0..n {
            let mut x = (pi * (T::of(k as f64) + T::of(0.75)) / (nf + T::of(0.5))).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= tol * (T::one() + x.abs()) {
                    let (_, d_final) = legendre_with_derivative(n, x);
                    dp = d_final;
                    break;
                }
            }
            nodes.push(x);
            weights.push(T::of(2.0) / ((T::one() - x * x) * dp * dp));
        }
        nodes.reverse();
        weights.reverse();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(T) -> T>(&self, a: T, b: T, f: F) -> T {
        let half = T::of(0.5);
        let mid = half * (a + b);
        let scale = half * (b - a);
        let mut acc = T::zero();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + scale * x);
        }
        scale * acc
    }
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, T::zero());
    }
    for j in 2..=n {
        let jf = T::of(j as f64);
        let p2 = ((T::of((2 * j - 1) as f64)) * x * p1 - (jf - T::one()) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    // P'_n from the recurrence n (x Pn - Pn-1) / (x² - 1).
    let dp = T::of(n as f64) * (x * p1 - p0) / (x * x - T::one());
    (p1, dp)
}

/// Piecewise-linear CDF table over a fine grid; queries clamp to `[0, 1]`.
#[derive(Debug, Clone)]
pub struct CdfTable<T> {
    grid: Vec<T>,
    cum: Vec<T>,
}

impl<T: Scalar> CdfTable<T> {
    /// Tabulates the normalized CDF of `exp(log_density)` on `[a, b]` with
    /// `n_panels` panels, each integrated by a 16-node rule.
    pub fn build<F: Fn(T) -> T>(log_density: F, a: T, b: T, n_panels: usize) -> Result<Self> {
        if !(a < b) || n_panels == 0 {
            return Err(Error::Config("cdf table needs a < b and panels".into()));
        }
        let rule = GaussLegendre::new(16)?;
        let width = (b - a) / T::of(n_panels as f64);
        // Shift by the maximum sampled log-density for conditioning.
        let mut shift = T::neg_infinity();
        for k in 0..=n_panels {
            let x = a + width * T::of(k as f64);
            shift = shift.max(log_density(x));
        }
        let mut grid = Vec::with_capacity(n_panels + 1);
        let mut cum = Vec::with_capacity(n_panels + 1);
        grid.push(a);
        cum.push(T::zero());
        let mut acc = T::zero();
        for k in 0..n_panels {
            let lo = a + width * T::of(k as f64);
            let hi = a + width * T::of((k + 1) as f64);
            acc += rule.integrate(lo, hi, |x| (log_density(x) - shift).exp());
            grid.push(hi);
            cum.push(acc);
        }
        if !(acc > T::zero() && acc.is_finite()) {
            return Err(Error::Numeric("cdf table: vanishing total mass".into()));
        }
        for c in cum.iter_mut() {
            *c /= acc;
        }
        Ok(Self { grid, cum })
    }

    pub fn eval(&self, x: T) -> T {
        let n = self.grid.len();
        if x <= self.grid[0] {
            return T::zero();
        }
        if x >= self.grid[n - 1] {
            return T::one();
        }
        let idx = self.grid.partition_point(|&g| g <= x);
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        let (c0, c1) = (self.cum[idx - 1], self.cum[idx]);
        let t = (x - x0) / (x1 - x0);
        (c0 + t * (c1 - c0)).min(T::one()).max(T::zero())
    }
}
