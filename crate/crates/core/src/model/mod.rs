//! Model parameterization `(Γ, μ, R, U)`, assumption validation, and the
//! closed-form rate constants for hard and soft reflection.

mod json;
mod potential;
mod rates;
mod validate;

pub use potential::PotentialSpec;
pub use rates::{
    drift_rate_bound, hard_reflection_rate, nu_vector, soft_reflection_rate, RateConstants,
};
pub use validate::{validate_model, ProbeGrid, ValidationReport};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Componentwise symmetry tolerance enforced on the noise covariance.
pub const GAMMA_SYMMETRY_TOL: f64 = 1e-12;

/// Smallest-eigenvalue threshold for the positive-definiteness gate; chosen
/// so that the Cholesky factorization in the simulator succeeds on every
/// model that passes validation.
pub const PD_TOL: f64 = 1e-10;

/// Full parameterization of a generalized reflected Brownian motion:
/// noise covariance `gamma`, drift vector `mu`, reflection matrix `refl`
/// (unit diagonal), and the soft-reflection potential.
///
/// Construction enforces the structural invariants (consistent dimensions,
/// finite entries, symmetric `gamma`, unit diagonal of `refl`); the
/// analytical hypotheses are checked separately by [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec<T> {
    d: usize,
    gamma: Mat<T>,
    mu: Vec<T>,
    refl: Mat<T>,
    potential: PotentialSpec<T>,
    refl_tridiagonal: bool,
}

impl<T: Scalar> ModelSpec<T> {
    pub fn new(
        gamma: Mat<T>,
        mu: Vec<T>,
        refl: Mat<T>,
        potential: PotentialSpec<T>,
    ) -> Result<Self> {
        let d = mu.len();
        if d == 0 {
            return Err(Error::Config("model dimension must be positive".into()));
        }
        if !gamma.is_square() || gamma.rows() != d {
            return Err(Error::Config(format!(
                "gamma must be {d}x{d}, got {}x{}",
                gamma.rows(),
                gamma.cols()
            )));
        }
        if !refl.is_square() || refl.rows() != d {
            return Err(Error::Config(format!(
                "refl must be {d}x{d}, got {}x{}",
                refl.rows(),
                refl.cols()
            )));
        }
        if !gamma.is_finite() || !refl.is_finite() || !mu.iter().all(|v| v.is_finite()) {
            return Err(Error::Input("model entries must be finite".into()));
        }
        if !gamma.is_symmetric(T::of(GAMMA_SYMMETRY_TOL)) {
            return Err(Error::Input(format!(
                "gamma must be symmetric to within {GAMMA_SYMMETRY_TOL}"
            )));
        }
        for i in 0..d {
            if (refl[(i, i)] - T::one()).abs() > T::of(GAMMA_SYMMETRY_TOL) {
                return Err(Error::Input(format!(
                    "reflection matrix must have unit diagonal, r[{i}][{i}] = {}",
                    refl[(i, i)]
                )));
            }
        }
        let refl_tridiagonal = is_tridiagonal_reflection(&refl);
        Ok(Self {
            d,
            gamma,
            mu,
            refl,
            potential,
            refl_tridiagonal,
        })
    }

    /// The standard tandem-queue model: identity covariance, tridiagonal
    /// reflection, exponential potential with unit steepness.
    pub fn oconnell_yor(mu: Vec<T>) -> Result<Self> {
        let d = mu.len();
        Self::new(
            Mat::identity(d),
            mu,
            tridiagonal_reflection(d),
            PotentialSpec::exponential(T::one())?,
        )
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn gamma(&self) -> &Mat<T> {
        &self.gamma
    }

    pub fn mu(&self) -> &[T] {
        &self.mu
    }

    pub fn refl(&self) -> &Mat<T> {
        &self.refl
    }

    pub fn potential(&self) -> &PotentialSpec<T> {
        &self.potential
    }

    /// True iff the reflection matrix has the tandem-queue tridiagonal form.
    pub fn has_tridiagonal_reflection(&self) -> bool {
        self.refl_tridiagonal
    }

    /// Drift field `b_i(x) = μ_i + Σ_j r_ij U'(x_j)`.
    ///
    /// For the tridiagonal reflection matrix this reduces to
    /// `μ_i + U'(x_i) - U'(x_{i-1})` with the boundary convention
    /// `U'(x_0) := 0` (no pressure on the first coordinate).
    pub fn drift(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.d];
        self.drift_into(x, &mut out);
        out
    }

    /// Allocation-free form of [`drift`](Self::drift) for the hot loop.
    pub fn drift_into(&self, x: &[T], out: &mut [T]) {
        debug_assert_eq!(x.len(), self.d);
        debug_assert_eq!(out.len(), self.d);
        if self.refl_tridiagonal {
            let mut prev = T::zero();
            for i in 0..self.d {
                let up = self.potential.u_prime(x[i]);
                out[i] = self.mu[i] + up - prev;
                prev = up;
            }
        } else {
            for i in 0..self.d {
                let mut acc = self.mu[i];
                for j in 0..self.d {
                    acc += self.refl[(i, j)] * self.potential.u_prime(x[j]);
                }
                out[i] = acc;
            }
        }
    }

    /// Canonical JSON document (17 significant digits; round-trips bit-exactly).
    pub fn to_json(&self) -> String {
        json::to_json(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        json::from_json(text)
    }

    /// Content hash of the canonical JSON document.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json().as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

/// The tandem-queue reflection matrix: unit diagonal, `-1` on the first
/// subdiagonal, zero elsewhere.
pub fn tridiagonal_reflection<T: Scalar>(d: usize) -> Mat<T> {
    let mut r = Mat::identity(d);
    for i in 1..d {
        r[(i, i - 1)] = -T::one();
    }
    r
}

fn is_tridiagonal_reflection<T: Scalar>(r: &Mat<T>) -> bool {
    let d = r.rows();
    let tol = T::of(GAMMA_SYMMETRY_TOL);
    for i in 0..d {
        for j in 0..d {
            let expected = if i == j {
                T::one()
            } else if i >= 1 && j == i - 1 {
                -T::one()
            } else {
                T::zero()
            };
            if (r[(i, j)] - expected).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Spectral norm (largest singular value), by power iteration on `MᵀM` to a
/// relative tolerance of `1e-12`.
pub fn spectral_norm<T: Scalar>(m: &Mat<T>) -> Result<T> {
    if !m.is_square() {
        return Err(Error::Config("spectral_norm: matrix not square".into()));
    }
    if !m.is_finite() {
        return Err(Error::Input("spectral_norm: non-finite entries".into()));
    }
    let n = m.rows();
    let mt = m.transpose();
    // Deterministic start with unequal components so the iterate is not
    // orthogonal to the leading eigenvector for simple structured matrices.
    let mut v: Vec<T> = (0..n)
        .map(|i| T::one() + T::of(i as f64 + 1.0) / T::of(n as f64 + 1.0))
        .collect();
    normalize(&mut v);
    let tol = T::of(1e-12);
    let mut prev = T::zero();
    for _ in 0..100_000 {
        let w = mt.matvec(&m.matvec(&v));
        let lambda = crate::scalar::norm2(&w);
        if lambda == T::zero() {
            return Ok(T::zero());
        }
        if !lambda.is_finite() {
            return Err(Error::Numeric("spectral_norm: overflow".into()));
        }
        v = w;
        normalize(&mut v);
        if (lambda - prev).abs() <= tol * lambda {
            return Ok(lambda.sqrt());
        }
        prev = lambda;
    }
    Err(Error::Numeric(
        "spectral_norm: power iteration did not converge within 1e5 iterations".into(),
    ))
}

/// Smallest eigenvalue of a symmetric matrix via the shift
/// `λ_min = s - ‖sI - Γ‖` with `s = ‖Γ‖`.
pub fn symmetric_min_eigenvalue<T: Scalar>(m: &Mat<T>) -> Result<T> {
    let s = spectral_norm(m)?;
    let shifted = Mat::identity(m.rows()).lin_comb(s, m, -T::one())?;
    Ok(s - spectral_norm(&shifted)?)
}

/// Generalized skew-symmetry: `|r_ij + r_ji - 2Γ_ij| ≤ tol` for all `i ≠ j`.
/// Under this condition the stationary distribution has the explicit
/// product form evaluated in the `stationary` module.
pub fn check_skew_symmetry<T: Scalar>(gamma: &Mat<T>, refl: &Mat<T>, tol: T) -> Result<bool> {
    if !gamma.is_square() || !refl.is_square() || gamma.rows() != refl.rows() {
        return Err(Error::Config("skew-symmetry: dimension mismatch".into()));
    }
    let d = gamma.rows();
    let two = T::of(2.0);
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            if (refl[(i, j)] + refl[(j, i)] - two * gamma[(i, j)]).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn normalize<T: Scalar>(v: &mut [T]) {
    let n = crate::scalar::norm2(v);
    if n > T::zero() {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}
