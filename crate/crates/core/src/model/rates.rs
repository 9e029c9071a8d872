//! Closed-form contraction-rate constants for the drift certificates of the
//! hard-reflection (ordered particles) and soft-reflection gap processes,
//! plus the certificate rate for the full soft-reflection diffusion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::{spectral_norm, ModelSpec};

/// Centered partial sums of the particle drifts:
/// `ν_i = Σ_{k≤i} μ_k - (i/d) Σ_{k≤d} μ_k` for `1 ≤ i ≤ d-1`.
///
/// `ν ≡ 0` exactly when all drifts are equal, the null-recurrent boundary
/// of the hard-reflection gap process.
pub fn nu_vector<T: Scalar>(mu: &[T]) -> Result<Vec<T>> {
    let d = mu.len();
    if d < 2 {
        return Err(Error::Precondition(
            "nu_vector requires at least two particles".into(),
        ));
    }
    let total = mu.iter().fold(T::zero(), |acc, &m| acc + m);
    let d_t = T::of(d as f64);
    let mut partial = T::zero();
    let mut nu = Vec::with_capacity(d - 1);
    for (i, &m) in mu.iter().take(d - 1).enumerate() {
        partial += m;
        let frac = T::of((i + 1) as f64) / d_t;
        nu.push(partial - frac * total);
    }
    Ok(nu)
}

/// Contraction rate of the hard-reflection gap certificate:
/// `(4/d)(1-cos(π/d))³ (1+cos(π/d))⁻¹ · min_i ν_i²`, defined when every
/// `ν_i` is strictly negative. Decays like `d⁻⁷` at fixed `min ν²`.
pub fn hard_reflection_rate<T: Scalar>(mu: &[T]) -> Result<T> {
    let nu = nu_vector(mu)?;
    if let Some(bad) = nu.iter().find(|v| **v >= T::zero()) {
        return Err(Error::Stability(format!(
            "hard-reflection rate requires all nu_i < 0, found {bad}"
        )));
    }
    let d = mu.len();
    let c = (T::of(std::f64::consts::PI) / T::of(d as f64)).cos();
    let one = T::one();
    let min_nu_sq = nu
        .iter()
        .map(|&v| v * v)
        .fold(T::infinity(), |acc, v| acc.min(v));
    Ok(T::of(4.0) / T::of(d as f64) * (one - c).powi(3) / (one + c) * min_nu_sq)
}

/// Contraction rate of the soft-reflection gap certificate:
/// `min_i |μ̃_i|² / (4d(1+cos(π/d)))`, where `μ̃` is the length-(d-1) vector
/// of gap drifts and `d` the particle count. Decays like `d⁻¹` at fixed
/// `min μ̃²`.
pub fn soft_reflection_rate<T: Scalar>(mu_tilde: &[T], d: usize) -> Result<T> {
    if mu_tilde.is_empty() || d < 2 {
        return Err(Error::Precondition(
            "soft-reflection rate requires at least two particles".into(),
        ));
    }
    if let Some(bad) = mu_tilde.iter().find(|v| **v >= T::zero()) {
        return Err(Error::Stability(format!(
            "soft-reflection rate requires all gap drifts < 0, found {bad}"
        )));
    }
    let c = (T::of(std::f64::consts::PI) / T::of(d as f64)).cos();
    let min_sq = mu_tilde
        .iter()
        .map(|&v| v * v)
        .fold(T::infinity(), |acc, v| acc.min(v));
    Ok(min_sq / (T::of(4.0) * T::of(d as f64) * (T::one() + c)))
}

/// Certificate contraction rate for the full soft-reflection diffusion:
/// `(min_i |μ_i|² - eps) / (2d‖Γ‖)`, clamped at zero.
///
/// Requires the stability gate `μ < 0` componentwise.
pub fn drift_rate_bound<T: Scalar>(spec: &ModelSpec<T>, eps: T) -> Result<T> {
    if eps < T::zero() || !eps.is_finite() {
        return Err(Error::Input("eps must be a nonnegative real".into()));
    }
    if let Some(bad) = spec.mu().iter().find(|v| **v >= T::zero()) {
        return Err(Error::Stability(format!(
            "drift rate bound requires mu < 0 componentwise, found {bad}"
        )));
    }
    let gamma_norm = spectral_norm(spec.gamma())?;
    let min_mu_sq = spec
        .mu()
        .iter()
        .map(|&m| m * m)
        .fold(T::infinity(), |acc, v| acc.min(v));
    let raw = (min_mu_sq - eps) / (T::of(2.0) * T::of(spec.dim() as f64) * gamma_norm);
    Ok(raw.max(T::zero()))
}

/// Bundle of the closed-form constants attached to one model.
#[derive(Debug, Clone, Serialize)]
pub struct RateConstants<T> {
    /// Spectral norm of the noise covariance.
    pub gamma_norm: T,
    /// Certificate rate of the soft-reflection diffusion (eps = 0).
    pub drift_bound: T,
    /// Hard-reflection gap rate, when the nu-gate holds.
    pub k_hard: Option<T>,
    /// Soft-reflection gap rate, when the gap drifts are negative.
    pub k_soft: Option<T>,
    /// Centered partial sums of the drifts.
    pub nu: Vec<T>,
}

impl<T: Scalar> RateConstants<T> {
    /// Computes every constant available for the model; the gap-process
    /// rates are `None` when their stability hypotheses fail.
    pub fn for_model(spec: &ModelSpec<T>) -> Result<Self> {
        let gamma_norm = spectral_norm(spec.gamma())?;
        let drift_bound = drift_rate_bound(spec, T::zero())?;
        let nu = nu_vector(spec.mu()).unwrap_or_default();
        let k_hard = hard_reflection_rate(spec.mu()).ok();
        let mu_tilde: Vec<T> = spec
            .mu()
            .windows(2)
            .map(|w| w[1] - w[0])
            .collect();
        let k_soft = soft_reflection_rate(&mu_tilde, spec.dim()).ok();
        Ok(Self {
            gamma_norm,
            drift_bound,
            k_hard,
            k_soft,
            nu,
        })
    }
}
