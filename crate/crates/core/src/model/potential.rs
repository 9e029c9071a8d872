use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Soft-reflection potential family.
///
/// The exponential family is `U(y) = -(1/β) e^{-βy}` with derivative
/// `U'(y) = e^{-βy}`: strictly positive, strictly decreasing, vanishing at
/// `+∞` and diverging at `-∞`. The zero potential (`U ≡ 0`) is a plumbing
/// and test mode; it does not satisfy the potential hypotheses and
/// validation reports it as such.
///
/// No power-law family is offered: the shape conditions demand that
/// `U'(ay)/U'(by)` diverge along `y → -∞` for `a > b > 0`, and for a
/// power-law derivative that ratio is constant in `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum PotentialSpec<T> {
    Exponential { beta: T },
    Zero,
}

impl<T: Scalar> PotentialSpec<T> {
    pub fn exponential(beta: T) -> Result<Self> {
        if !(beta.is_finite() && beta > T::zero()) {
            return Err(Error::Input(format!(
                "potential steepness must be a positive real, got {beta}"
            )));
        }
        Ok(Self::Exponential { beta })
    }

    /// Inverse length scale of the penalty, when the family has one.
    pub fn beta(&self) -> Option<T> {
        match self {
            Self::Exponential { beta } => Some(*beta),
            Self::Zero => None,
        }
    }

    /// `(U(y), U'(y))`. Saturating and never NaN: for extremely negative `y`
    /// the values clamp at a large finite magnitude, a simulation-side guard
    /// that is never reached in validated desk-scale experiments.
    pub fn eval(&self, y: T) -> (T, T) {
        match self {
            Self::Zero => (T::zero(), T::zero()),
            Self::Exponential { beta } => {
                let cap = saturation_cap::<T>();
                let up = (-*beta * y).exp().min(cap);
                let u = (-up / *beta).max(-cap);
                (u, up)
            }
        }
    }

    /// `U'(y)` alone (the term entering every drift field).
    pub fn u_prime(&self, y: T) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::Exponential { beta } => (-*beta * y).exp().min(saturation_cap::<T>()),
        }
    }
}

/// Saturation bound for potential values: `1e300` where representable,
/// otherwise a comfortable margin below the type's maximum.
fn saturation_cap<T: Scalar>() -> T {
    let c = T::of(1e300);
    if c.is_finite() {
        c
    } else {
        T::max_value() / T::of(16.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_values_at_origin() {
        let p = PotentialSpec::exponential(1.0f64).unwrap();
        assert_eq!(p.eval(0.0), (-1.0, 1.0));
    }

    #[test]
    fn exponential_at_minus_ln2() {
        let p = PotentialSpec::exponential(1.0f64).unwrap();
        let (u, up) = p.eval(-(2.0f64.ln()));
        assert!((u + 2.0).abs() < 1e-14);
        assert!((up - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_family_is_identically_zero() {
        let p: PotentialSpec<f64> = PotentialSpec::Zero;
        for y in [-1e6, -1.0, 0.0, 3.5, 1e9] {
            assert_eq!(p.eval(y), (0.0, 0.0));
        }
    }

    #[test]
    fn saturates_instead_of_overflowing() {
        let p = PotentialSpec::exponential(1.0f64).unwrap();
        let (u, up) = p.eval(-1e6);
        assert_eq!(up, 1e300);
        assert_eq!(u, -1e300);
        assert!(u.is_finite() && up.is_finite());
        // Rejects a non-positive steepness.
        assert!(PotentialSpec::exponential(0.0f64).is_err());
        assert!(PotentialSpec::exponential(f64::NAN).is_err());
    }

    #[test]
    fn saturates_for_f32_too() {
        let p = PotentialSpec::exponential(1.0f32).unwrap();
        let (u, up) = p.eval(-1e5);
        assert!(u.is_finite() && up.is_finite());
    }
}
