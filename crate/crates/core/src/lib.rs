//! Simulation and numerical certification toolkit for generalized reflected
//! Brownian motions (GRBMs): multidimensional diffusions whose hard boundary
//! reflection is replaced by a steep potential drift ("soft reflection").
//!
//! The crate is organized around four subsystems:
//!
//! - [`model`]: model parameterization `(Γ, μ, R, U)`, assumption validation,
//!   and the closed-form rate constants for hard and soft reflection.
//! - [`lyapunov`]: the norm-like Lyapunov function `V = exp(λφ(‖x‖))`, exact
//!   generator application `ℒV`, the directional drift functionals, and a
//!   sampling-based drift-condition certifier.
//! - [`sim`]: time-discretized trajectory generation (tamed/plain Euler for
//!   soft reflection, sequential-max recursion for hard reflection) with
//!   deterministic counter-based noise and parallel ensembles.
//! - [`stationary`]: product-form stationary densities under skew-symmetry,
//!   quadrature normalization, histogram/KS distances, TV-decay fitting, and
//!   the penalty-limit (soft-to-hard) comparison.
//!
//! All numerical kernels are generic over the scalar type via [`Scalar`];
//! the aliases below fix the `f64` instantiations used by the CLI.

pub mod error;
pub mod linalg;
pub mod lyapunov;
pub mod model;
pub mod scalar;
pub mod sim;
pub mod stationary;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// `f64` model parameterization.
pub type Model = model::ModelSpec<f64>;
/// `f64` potential family.
pub type Potential = model::PotentialSpec<f64>;
/// `f64` dense matrix.
pub type Matrix = linalg::Mat<f64>;
/// `f64` trajectory.
pub type Traj = sim::Trajectory<f64>;
/// `f64` ensemble of paths.
pub type Paths = sim::Ensemble<f64>;
/// `f64` drift-condition certificate report.
pub type Drift = lyapunov::DriftReport<f64>;
/// `f64` TV-decay fit.
pub type Decay = stationary::DecayFit<f64>;
