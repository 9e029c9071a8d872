//! Numerical validation of the model hypotheses: strict positive
//! definiteness of the covariance, tridiagonal reflection structure, the
//! potential-shape conditions, and the componentwise-negative drift gate.
//!
//! The potential conditions are finite-probe checks on a grid over
//! `[-span, span]` with `span = 40/β`, not symbolic proofs; "vanishes"
//! means below `1e-12` and "diverges" means above `1e10`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{symmetric_min_eigenvalue, ModelSpec, PotentialSpec, PD_TOL};

/// Threshold below which a probed limit counts as zero.
pub const LIMIT_ZERO: f64 = 1e-12;
/// Threshold above which a probed limit counts as divergent.
pub const LIMIT_INF: f64 = 1e10;

/// Sampling descriptor for the potential probes.
#[derive(Debug, Clone, Copy)]
pub struct ProbeGrid<T> {
    /// Number of grid points per probe.
    pub n_points: usize,
    /// Half-width of the probe interval in units of `1/β`.
    pub span_factor: T,
}

impl<T: Scalar> Default for ProbeGrid<T> {
    fn default() -> Self {
        Self {
            n_points: 801,
            span_factor: T::of(40.0),
        }
    }
}

/// Per-condition outcome of [`validate_model`].
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport<T> {
    /// Covariance strictly positive definite (`λ_min > 1e-10`).
    pub pd_ok: bool,
    /// Smallest-eigenvalue estimate of the covariance.
    pub lambda_min: T,
    /// Reflection matrix has the tandem-queue tridiagonal form.
    pub tridiag_ok: bool,
    /// Potential derivative nonnegative and strictly decreasing on the
    /// negative axis.
    pub potential_monotone_ok: bool,
    /// `U'` vanishes at `+span` and diverges at `-span`.
    pub potential_limits_ok: bool,
    /// `U'(2y)/U'(y)` grows without bound along `y → -∞`.
    pub potential_ratio_ok: bool,
    /// Drift strictly negative componentwise.
    pub stability_ok: bool,
    /// Human-readable findings for failed or noteworthy checks.
    pub messages: Vec<String>,
}

impl<T: Scalar> ValidationReport<T> {
    /// All hypothesis checks pass.
    pub fn all_ok(&self) -> bool {
        self.pd_ok && self.tridiag_ok && self.potential_ok() && self.stability_ok
    }

    /// The three potential sub-conditions together.
    pub fn potential_ok(&self) -> bool {
        self.potential_monotone_ok && self.potential_limits_ok && self.potential_ratio_ok
    }
}

/// Runs every hypothesis check on the model. Structural errors (dimension
/// mismatch, non-finite entries) are rejected by `ModelSpec` construction;
/// this reports the analytical conditions as booleans.
pub fn validate_model<T: Scalar>(
    spec: &ModelSpec<T>,
    grid: &ProbeGrid<T>,
) -> Result<ValidationReport<T>> {
    if grid.n_points < 3 || !(grid.span_factor.is_finite() && grid.span_factor > T::zero()) {
        return Err(Error::Config("probe grid must have >= 3 points and a positive span".into()));
    }
    let mut messages = Vec::new();

    let lambda_min = symmetric_min_eigenvalue(spec.gamma())?;
    let pd_ok = lambda_min > T::of(PD_TOL);
    if !pd_ok {
        messages.push(format!(
            "covariance is not strictly positive definite (lambda_min = {lambda_min:e})"
        ));
    }

    let tridiag_ok = spec.has_tridiagonal_reflection();
    if !tridiag_ok {
        messages.push("reflection matrix is not in tandem-queue tridiagonal form".into());
    }

    let span = match spec.potential().beta() {
        Some(beta) => grid.span_factor / beta,
        None => grid.span_factor,
    };
    let (monotone_ok, limits_ok, ratio_ok) = probe_potential(spec.potential(), span, grid.n_points);
    if !monotone_ok {
        messages.push("U' is not nonnegative and strictly decreasing on the negative axis".into());
    }
    if !limits_ok {
        messages.push(format!(
            "U' limits fail: need U'({span}) < {LIMIT_ZERO:e} and U'(-{span}) > {LIMIT_INF:e}"
        ));
    }
    if !ratio_ok {
        messages.push("U'(2y)/U'(y) does not grow along y -> -inf".into());
    }

    let stability_ok = spec.mu().iter().all(|&m| m < T::zero());
    if !stability_ok {
        messages.push("drift vector must be strictly negative componentwise".into());
    }

    // Sampled non-explosion probe: max of x.b(x)/(1+|x|^2) over grid points
    // along the diagonal; finite values confirm the linear-growth bound.
    let khas = khasminskii_probe(spec, span, grid.n_points);
    messages.push(format!(
        "sampled non-explosion bound x.b(x)/(1+|x|^2) <= {khas:.6e}"
    ));

    Ok(ValidationReport {
        pd_ok,
        lambda_min,
        tridiag_ok,
        potential_monotone_ok: monotone_ok,
        potential_limits_ok: limits_ok,
        potential_ratio_ok: ratio_ok,
        stability_ok,
        messages,
    })
}

fn probe_potential<T: Scalar>(
    potential: &PotentialSpec<T>,
    span: T,
    n_points: usize,
) -> (bool, bool, bool) {
    let n = n_points.max(3);
    let step = span / T::of((n - 1) as f64);

    // 3a: U' >= 0 everywhere sampled, strictly decreasing on [-span, 0].
    let mut monotone_ok = true;
    let mut prev: Option<T> = None;
    for k in 0..n {
        let y = -span + step * T::of(k as f64);
        let up = potential.u_prime(y);
        if up < T::zero() || !up.is_finite() {
            monotone_ok = false;
            break;
        }
        if y <= T::zero() {
            if let Some(p) = prev {
                if up >= p {
                    monotone_ok = false;
                    break;
                }
            }
            prev = Some(up);
        }
    }
    // Nonnegativity on the positive side as well.
    if monotone_ok {
        for k in 0..n {
            let y = step * T::of(k as f64);
            let up = potential.u_prime(y);
            if up < T::zero() || !up.is_finite() {
                monotone_ok = false;
                break;
            }
        }
    }

    // 3b: vanishing and diverging tails at the probe endpoints.
    let limits_ok = potential.u_prime(span) < T::of(LIMIT_ZERO)
        && potential.u_prime(-span) > T::of(LIMIT_INF);

    // 3c: the ratio U'(2y)/U'(y) must increase strictly along y -> -inf and
    // exceed the divergence threshold at the end of the probe.
    let mut ratio_ok = true;
    let mut prev_ratio: Option<T> = None;
    for k in 1..=n {
        let y = -span * T::of(k as f64) / T::of(n as f64);
        let denom = potential.u_prime(y);
        let ratio = potential.u_prime(T::of(2.0) * y) / denom;
        if !ratio.is_finite() {
            ratio_ok = false;
            break;
        }
        if let Some(p) = prev_ratio {
            if ratio <= p {
                ratio_ok = false;
                break;
            }
        }
        prev_ratio = Some(ratio);
    }
    if ratio_ok {
        ratio_ok = prev_ratio.is_some_and(|r| r > T::of(LIMIT_INF));
    }

    (monotone_ok, limits_ok, ratio_ok)
}

fn khasminskii_probe<T: Scalar>(spec: &ModelSpec<T>, span: T, n_points: usize) -> T {
    let d = spec.dim();
    let n = n_points.max(3).min(201);
    let step = T::of(2.0) * span / T::of((n - 1) as f64);
    let mut worst = T::neg_infinity();
    for k in 0..n {
        let t = -span + step * T::of(k as f64);
        let x = vec![t; d];
        let b = spec.drift(&x);
        let num = crate::scalar::dot(&x, &b);
        let den = T::one() + crate::scalar::dot(&x, &x);
        worst = worst.max(num / den);
    }
    worst
}
