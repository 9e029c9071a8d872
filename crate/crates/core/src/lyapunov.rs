//! The norm-like Lyapunov function `V(x) = exp(λ φ(‖x‖))`, exact generator
//! application, the directional drift functionals, and a sampling-based
//! certifier for the exponential drift condition
//! `ℒV ≤ -kV + b·1_{B_r}`.
//!
//! The radial profile `φ` vanishes on `[0, 1/2]`, equals the identity from
//! `1` on, and is bridged in between by the unique quintic with matching
//! value, slope and curvature at both junctions, so `V` is C² and constant
//! equal to one near the origin.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{drift_rate_bound, spectral_norm, ModelSpec};
use crate::scalar::{norm2, Scalar};
use crate::sim::rng;

/// Radial bump profile: `φ(s) = 0` for `s ≤ 1/2`, `φ(s) = s` for `s ≥ 1`,
/// quintic Hermite bridge on `(1/2, 1)`. Increasing and C².
#[derive(Debug, Clone, Copy, Default)]
pub struct BumpProfile;

impl BumpProfile {
    /// `(φ(s), φ'(s), φ''(s))` for `s ≥ 0`.
    pub fn eval<T: Scalar>(s: T) -> Result<(T, T, T)> {
        bump_eval(s)
    }
}

/// `(φ(s), φ'(s), φ''(s))`; errors on negative `s`.
///
/// On the bridge, with `t = s - 1/2`:
/// `φ = 64t³ - 184t⁴ + 144t⁵`, whose boundary data
/// `φ(1/2)=φ'(1/2)=φ''(1/2)=0`, `φ(1)=φ'(1)=1`, `φ''(1)=0` pin it uniquely
/// among quintics. Its derivative `t²(192 - 736t + 720t²)` has negative
/// discriminant, so φ is strictly increasing across the bridge.
pub fn bump_eval<T: Scalar>(s: T) -> Result<(T, T, T)> {
    if !(s >= T::zero()) {
        return Err(Error::Precondition(format!(
            "bump profile is defined for s >= 0, got {s}"
        )));
    }
    let half = T::of(0.5);
    if s <= half {
        return Ok((T::zero(), T::zero(), T::zero()));
    }
    if s >= T::one() {
        return Ok((s, T::one(), T::zero()));
    }
    let t = s - half;
    let c3 = T::of(64.0);
    let c4 = T::of(-184.0);
    let c5 = T::of(144.0);
    let phi = ((c5 * t + c4) * t + c3) * t * t * t;
    let dphi = ((T::of(720.0) * t + T::of(-736.0)) * t + T::of(192.0)) * t * t;
    let ddphi = ((T::of(2880.0) * t + T::of(-2208.0)) * t + T::of(384.0)) * t;
    Ok((phi, dphi, ddphi))
}

/// `V(x) = exp(λ φ(‖x‖)) ∈ [1, ∞)`; errors unless `λ > 0`.
pub fn lyapunov_v<T: Scalar>(x: &[T], lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    let (phi, _, _) = bump_eval(norm2(x))?;
    Ok((lambda * phi).exp())
}

/// Gradient and Hessian of `ψ(x) = φ(‖x‖)`.
///
/// `Dψ = φ'(r) x/r` and
/// `D²ψ = φ''(r) xxᵀ/r² + φ'(r) (I/r - xxᵀ/r³)` with `r = ‖x‖`; both vanish
/// identically on the ball `r ≤ 1/2`.
pub fn psi_derivatives<T: Scalar>(x: &[T]) -> (Vec<T>, Mat<T>) {
    let d = x.len();
    let r = norm2(x);
    if r <= T::of(0.5) {
        return (vec![T::zero(); d], Mat::zeros(d, d));
    }
    let (_, dphi, ddphi) = bump_eval(r).expect("r > 0");
    let grad: Vec<T> = x.iter().map(|&xi| dphi * xi / r).collect();
    let mut hess = Mat::zeros(d, d);
    let r2 = r * r;
    let r3 = r2 * r;
    for i in 0..d {
        for j in 0..d {
            let outer = x[i] * x[j];
            let mut h = ddphi * outer / r2 - dphi * outer / r3;
            if i == j {
                h += dphi / r;
            }
            hess[(i, j)] = h;
        }
    }
    (grad, hess)
}

/// `ℒV(x) / V(x)`: the generator applied to `V`, divided by `V`.
///
/// `ℒV/V = ½ Σ_ij Γ_ij (λ ψ_ij + λ² ψ_i ψ_j) + λ Σ_i b_i(x) ψ_i` with the
/// drift field `b_i = μ_i + Σ_j r_ij U'(x_j)`. Safe at radii where `V`
/// itself would overflow.
pub fn generator_ratio<T: Scalar>(spec: &ModelSpec<T>, lambda: T, x: &[T]) -> Result<T> {
    check_lambda(lambda)?;
    if x.len() != spec.dim() {
        return Err(Error::Precondition(format!(
            "state has length {}, model dimension is {}",
            x.len(),
            spec.dim()
        )));
    }
    let r = norm2(x);
    if r <= T::of(0.5) {
        return Ok(T::zero());
    }
    let (grad, hess) = psi_derivatives(x);
    let d = spec.dim();
    let gamma = spec.gamma();
    let half = T::of(0.5);
    let mut second = T::zero();
    for i in 0..d {
        for j in 0..d {
            second += gamma[(i, j)] * (lambda * hess[(i, j)] + lambda * lambda * grad[i] * grad[j]);
        }
    }
    let b = spec.drift(x);
    let first = crate::scalar::dot(&b, &grad);
    Ok(half * second + lambda * first)
}

/// `ℒV(x)`; equals [`generator_ratio`] times `V(x)` and vanishes on the
/// ball `‖x‖ ≤ 1/2` where `V` is constant.
pub fn generator_apply<T: Scalar>(spec: &ModelSpec<T>, lambda: T, x: &[T]) -> Result<T> {
    let ratio = generator_ratio(spec, lambda, x)?;
    Ok(ratio * lyapunov_v(x, lambda)?)
}

/// Directional drift functional
/// `β(x) = (μ₁+U'(x₁)) x₁/‖x‖ + Σ_{k≥2} (μ_k+U'(x_k)-U'(x_{k-1})) x_k/‖x‖`.
///
/// This is the radial component of the tridiagonal drift field; the whole
/// contraction analysis reduces to bounding it from above.
pub fn beta_d<T: Scalar>(spec: &ModelSpec<T>, x: &[T]) -> Result<T> {
    if x.len() != spec.dim() {
        return Err(Error::Precondition("dimension mismatch".into()));
    }
    let r = norm2(x);
    if r == T::zero() {
        return Err(Error::Precondition("beta is undefined at the origin".into()));
    }
    let potential = spec.potential();
    let mu = spec.mu();
    let mut acc = T::zero();
    let mut prev = T::zero();
    for (k, &xk) in x.iter().enumerate() {
        let up = potential.u_prime(xk);
        acc += (mu[k] + up - prev) * xk / r;
        prev = up;
    }
    Ok(acc)
}

/// Potential part of `β` on the open negative orthant:
/// `γ(x) = Σ_{k<d} (x_k-x_{k+1}) U'(x_k)/‖x‖ + x_d U'(x_d)/‖x‖`.
///
/// On that orthant `β(x) = Σ μ_k x_k/‖x‖ + γ(x)` exactly (telescoping).
pub fn gamma_d<T: Scalar>(spec: &ModelSpec<T>, x: &[T]) -> Result<T> {
    if x.len() != spec.dim() {
        return Err(Error::Precondition("dimension mismatch".into()));
    }
    if x.iter().any(|&v| v >= T::zero()) {
        return Err(Error::Precondition(
            "gamma is defined on the open negative orthant".into(),
        ));
    }
    let r = norm2(x);
    let potential = spec.potential();
    let d = x.len();
    let mut acc = T::zero();
    for k in 0..d - 1 {
        acc += (x[k] - x[k + 1]) * potential.u_prime(x[k]) / r;
    }
    acc += x[d - 1] * potential.u_prime(x[d - 1]) / r;
    Ok(acc)
}

/// Closed-form exponent choice `λ = min|μ_i| / (d ‖Γ‖)`.
pub fn default_lambda<T: Scalar>(spec: &ModelSpec<T>) -> Result<T> {
    if let Some(bad) = spec.mu().iter().find(|v| **v >= T::zero()) {
        return Err(Error::Stability(format!(
            "default exponent requires mu < 0, found {bad}"
        )));
    }
    let min_mu = spec
        .mu()
        .iter()
        .map(|m| m.abs())
        .fold(T::infinity(), |a, v| a.min(v));
    Ok(min_mu / (T::of(spec.dim() as f64) * spectral_norm(spec.gamma())?))
}

/// Options for the sampling certifier.
#[derive(Debug, Clone, Copy)]
pub struct DriftOptions<T> {
    /// Exponent in `V`; defaults to the closed-form choice.
    pub lambda: Option<T>,
    /// Slack subtracted inside the target-rate formula.
    pub eps: T,
    /// Shell (and ball) sample count.
    pub n_samples: usize,
    /// Initial ball radius; doubled until acceptance.
    pub r_init: T,
    /// Outer shell radius as a multiple of `r`.
    pub shell_factor: T,
    /// Give up once `r` exceeds this.
    pub r_max: T,
    pub seed: u64,
}

impl<T: Scalar> Default for DriftOptions<T> {
    fn default() -> Self {
        Self {
            lambda: None,
            eps: T::of(0.05),
            n_samples: 100_000,
            r_init: T::of(16.0),
            shell_factor: T::of(10.0),
            r_max: T::of((1u64 << 20) as f64),
            seed: 0,
        }
    }
}

/// Empirical drift certificate. The sampled quantities are evidence, not a
/// proof: `k` is the contraction rate observed on the shell, `k_target` the
/// closed-form rate the certificate is measured against, and `b` the
/// compact-set offset observed inside the ball.
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport<T> {
    pub lambda: T,
    /// Achieved contraction rate: `-max ℒV/V` over the shell.
    pub k: T,
    /// Target rate `drift_rate_bound(spec, eps)`.
    pub k_target: T,
    /// `max(0, max_{ball} (ℒV + kV))`.
    pub b: T,
    pub r: T,
    pub shell_outer: T,
    pub n_samples: usize,
    /// `max over shell of (ℒV/V + k_target)`; nonpositive iff accepted.
    pub worst_margin: T,
    /// Shell samples violating the target rate.
    pub violation_count: usize,
    pub accepted: bool,
    pub eps: T,
    pub seed: u64,
}

/// One shell sample row, exported as CSV by the drift-check command.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriftSample<T> {
    pub idx: usize,
    pub radius: T,
    pub lv_over_v: T,
}

/// Certificate report plus the shell scan it is based on.
#[derive(Debug, Clone)]
pub struct DriftCertificate<T> {
    pub report: DriftReport<T>,
    pub samples: Vec<DriftSample<T>>,
}

/// Samples the shell `r ≤ ‖x‖ ≤ shell_factor·r` (directions uniform on the
/// sphere, radii uniform) and tests `ℒV/V ≤ -k_target` at every point,
/// doubling `r` until the certificate is accepted or `r` exceeds `r_max`.
/// A rejected certificate is a result, not an error.
pub fn verify_drift<T: Scalar>(
    spec: &ModelSpec<T>,
    opts: &DriftOptions<T>,
) -> Result<DriftCertificate<T>> {
    let k_target = drift_rate_bound(spec, opts.eps)?;
    let lambda = match opts.lambda {
        Some(l) => {
            check_lambda(l)?;
            l
        }
        None => default_lambda(spec)?,
    };
    if opts.n_samples == 0 {
        return Err(Error::Config("certifier needs at least one sample".into()));
    }
    if !(opts.r_init > T::zero() && opts.shell_factor > T::one()) {
        return Err(Error::Config(
            "need r_init > 0 and shell_factor > 1".into(),
        ));
    }

    let d = spec.dim();
    let mut r = opts.r_init;
    loop {
        let outer = opts.shell_factor * r;
        let samples: Vec<DriftSample<T>> = (0..opts.n_samples)
            .into_par_iter()
            .map(|idx| {
                let x = shell_point(opts.seed, idx as u64, d, r, outer);
                let ratio = generator_ratio(spec, lambda, &x).expect("dimensions match");
                DriftSample {
                    idx,
                    radius: norm2(&x),
                    lv_over_v: ratio,
                }
            })
            .collect();
        let max_ratio = samples
            .iter()
            .map(|s| s.lv_over_v)
            .fold(T::neg_infinity(), |a, v| a.max(v));
        let violation_count = samples
            .iter()
            .filter(|s| s.lv_over_v + k_target > T::zero())
            .count();
        let k = -max_ratio;
        let accepted = violation_count == 0;

        let next_r = r + r;
        if accepted || next_r > opts.r_max {
            // Offset observed inside the ball, against the achieved rate.
            let b = (0..opts.n_samples)
                .into_par_iter()
                .map(|idx| {
                    let x = ball_point(opts.seed, idx as u64, d, r);
                    let ratio = generator_ratio(spec, lambda, &x).expect("dimensions match");
                    let v = lyapunov_v(&x, lambda).expect("lambda checked");
                    (ratio + k) * v
                })
                .reduce(|| T::zero(), |a, v| a.max(v))
                .max(T::zero())
                .min(T::of(1e300));
            let report = DriftReport {
                lambda,
                k,
                k_target,
                b,
                r,
                shell_outer: outer,
                n_samples: opts.n_samples,
                worst_margin: max_ratio + k_target,
                violation_count,
                accepted,
                eps: opts.eps,
                seed: opts.seed,
            };
            return Ok(DriftCertificate { report, samples });
        }
        r = next_r;
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::Precondition(format!(
            "exponent lambda must be a positive real, got {lambda}"
        )));
    }
    Ok(())
}

/// Direction uniform on the sphere (normalized Gaussian), radius uniform on
/// `[r, outer]`. Counter layout: step 0 holds the direction components,
/// step 1 the radius deviate.
fn shell_point<T: Scalar>(seed: u64, idx: u64, d: usize, r: T, outer: T) -> Vec<T> {
    let mut x = vec![T::zero(); d];
    rng::fill_normals(seed, idx, 0, &mut x);
    let mut n = norm2(&x);
    if n == T::zero() {
        x[0] = T::one();
        n = T::one();
    }
    let u = T::of(rng::uniform(seed, idx, 1, 0));
    let radius = r + (outer - r) * u;
    for v in x.iter_mut() {
        *v = *v / n * radius;
    }
    x
}

/// Direction uniform on the sphere, radius uniform on `[0, r]`; steps 2 and
/// 3 keep the ball scan independent of the shell scan.
fn ball_point<T: Scalar>(seed: u64, idx: u64, d: usize, r: T) -> Vec<T> {
    let mut x = vec![T::zero(); d];
    rng::fill_normals(seed, idx, 2, &mut x);
    let mut n = norm2(&x);
    if n == T::zero() {
        x[0] = T::one();
        n = T::one();
    }
    let u = T::of(rng::uniform(seed, idx, 3, 0));
    let radius = r * u;
    for v in x.iter_mut() {
        *v = *v / n * radius;
    }
    x
}
