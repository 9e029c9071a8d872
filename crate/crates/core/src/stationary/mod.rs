//! Stationary-law analysis: the product-form density available under the
//! generalized skew-symmetry condition, quadrature normalization, empirical
//! distances, decay-exponent fitting, tail functionals, and the
//! soft-to-hard penalty comparison.

mod decay;
mod hist;
mod ks;
mod quad;

pub use decay::{
    fit_decay_exponent, mixing_curve, DecayFit, MixingOptions, MixingPoint, Observable,
    TV_FIT_CEIL, TV_FIT_FLOOR,
};
pub use hist::{empirical_histogram, freedman_diaconis_edges, tv_distance, Histogram};
pub use ks::{ks_distance_1d, ks_distance_two_sample, KS_CRIT_1PCT};
pub use quad::{CdfTable, GaussLegendre};

use crate::error::{Error, Result};
use crate::linalg::solve;
use crate::lyapunov::bump_eval;
use crate::model::{check_skew_symmetry, ModelSpec, PotentialSpec};
use crate::scalar::{norm2, Scalar};
use crate::sim::{gaps, rng, run_ensemble, Keep, Scheme, SimOptions, SimTarget, Trajectory};

/// Tolerance inside which the skew-symmetry condition must hold before the
/// product-form density applies.
pub const SKEW_TOL: f64 = 1e-10;

/// Relative Richardson tolerance for quadrature normalization.
pub const QUAD_REL_TOL: f64 = 1e-8;

/// Density decay required at the quadrature boundary, relative to the peak.
pub const BOUNDARY_DECAY: f64 = 1e-12;

/// Where a density lives; boxes skip the boundary-decay check.
#[derive(Debug, Clone, PartialEq)]
pub enum Support<T> {
    Unbounded,
    Box(Vec<(T, T)>),
}

/// Anything with a pointwise log-density.
pub trait LogDensity<T: Scalar> {
    fn dims(&self) -> usize;
    fn log_density(&self, x: &[T]) -> T;
    fn support(&self) -> Support<T> {
        Support::Unbounded
    }
}

/// Unnormalized product-form stationary log-density
/// `log p(x) = 2 [ Σ_i U(x_i) + c·x ]` with `c = (2Γ - R)⁻¹ μ`,
/// valid when the skew-symmetry condition holds.
#[derive(Debug, Clone)]
pub struct DensitySpec<T> {
    pub model_digest: String,
    potential: PotentialSpec<T>,
    linear: Vec<T>,
    /// Normalization constant once computed by [`normalize_density`].
    pub normalization: Option<T>,
}

impl<T: Scalar> DensitySpec<T> {
    pub fn linear_coefficients(&self) -> &[T] {
        &self.linear
    }

    pub fn with_normalization(mut self, z: T) -> Self {
        self.normalization = Some(z);
        self
    }
}

impl<T: Scalar> LogDensity<T> for DensitySpec<T> {
    fn dims(&self) -> usize {
        self.linear.len()
    }

    fn log_density(&self, x: &[T]) -> T {
        let mut acc = T::zero();
        for (&xi, &ci) in x.iter().zip(&self.linear) {
            let (u, _) = self.potential.eval(xi);
            acc = acc + u + ci * xi;
        }
        T::of(2.0) * acc
    }
}

/// Builds the product-form density for a model, failing when the
/// skew-symmetry condition does not hold (the formula is inapplicable) or
/// when `2Γ - R` is singular.
pub fn product_density<T: Scalar>(spec: &ModelSpec<T>) -> Result<DensitySpec<T>> {
    if !check_skew_symmetry(spec.gamma(), spec.refl(), T::of(SKEW_TOL))? {
        return Err(Error::Precondition(
            "skew-symmetry fails: product-form density formula inapplicable".into(),
        ));
    }
    let m = spec
        .gamma()
        .lin_comb(T::of(2.0), spec.refl(), -T::one())?;
    let linear = solve(&m, spec.mu())?;
    Ok(DensitySpec {
        model_digest: spec.digest(),
        potential: *spec.potential(),
        linear,
        normalization: None,
    })
}

/// Pointwise unnormalized log-density of the product form.
pub fn product_log_density<T: Scalar>(spec: &ModelSpec<T>, x: &[T]) -> Result<T> {
    if x.len() != spec.dim() {
        return Err(Error::Precondition("dimension mismatch".into()));
    }
    Ok(product_density(spec)?.log_density(x))
}

/// Normalization constant by tensor Gauss-Legendre quadrature over `domain`
/// (one or two dimensions). For unbounded-support densities the domain must
/// be wide enough that the boundary density is below `1e-12` of the peak;
/// the returned value passes a Richardson check between `n` and `2n` nodes
/// at relative tolerance `1e-8`.
pub fn normalize_density<T: Scalar, D: LogDensity<T>>(
    dens: &D,
    domain: &[(T, T)],
    n_quad: usize,
) -> Result<T> {
    let dims = dens.dims();
    if dims == 0 || dims > 2 {
        return Err(Error::Config(
            "quadrature supports one or two dimensions".into(),
        ));
    }
    if domain.len() != dims {
        return Err(Error::Config("domain dimension mismatch".into()));
    }
    for &(lo, hi) in domain {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config("domain bounds must be finite with lo < hi".into()));
        }
    }
    if !(2..=100_000).contains(&n_quad) {
        return Err(Error::Config("node count out of range".into()));
    }

    // Peak estimate on a coarse scan; used for conditioning and for the
    // boundary-decay check.
    let peak = scan_max(dens, domain, 65);
    if matches!(dens.support(), Support::Unbounded) {
        let boundary = boundary_max(dens, domain, 65);
        if boundary - peak > T::of(BOUNDARY_DECAY).ln() {
            return Err(Error::Domain(format!(
                "boundary density exp({boundary:.3e}) too close to peak exp({peak:.3e}); widen the domain"
            )));
        }
    }

    let z1 = tensor_integral(dens, domain, n_quad, peak)?;
    let z2 = tensor_integral(dens, domain, 2 * n_quad, peak)?;
    if (z2 - z1).abs() > T::of(QUAD_REL_TOL) * z2.abs() {
        return Err(Error::Numeric(format!(
            "quadrature not converged: {z1:e} vs {z2:e} at n and 2n nodes"
        )));
    }
    Ok(z2 * peak.exp())
}

fn tensor_integral<T: Scalar, D: LogDensity<T>>(
    dens: &D,
    domain: &[(T, T)],
    n: usize,
    shift: T,
) -> Result<T> {
    let rule = GaussLegendre::new(n)?;
    match domain {
        [(a, b)] => Ok(rule.integrate(*a, *b, |x| (dens.log_density(&[x]) - shift).exp())),
        [(a0, b0), (a1, b1)] => {
            let half = T::of(0.5);
            let mid0 = half * (*a0 + *b0);
            let sc0 = half * (*b0 - *a0);
            let mut acc = T::zero();
            for (&x0, &w0) in rule.nodes().iter().zip(rule.weights()) {
                let u = mid0 + sc0 * x0;
                let inner =
                    rule.integrate(*a1, *b1, |v| (dens.log_density(&[u, v]) - shift).exp());
                acc += w0 * inner;
            }
            Ok(sc0 * acc)
        }
        _ => unreachable!("dims checked"),
    }
}

fn scan_max<T: Scalar, D: LogDensity<T>>(dens: &D, domain: &[(T, T)], n: usize) -> T {
    let mut best = T::neg_infinity();
    match domain {
        [(a, b)] => {
            let step = (*b - *a) / T::of((n - 1) as f64);
            for k in 0..n {
                let x = *a + step * T::of(k as f64);
                best = best.max(dens.log_density(&[x]));
            }
        }
        [(a0, b0), (a1, b1)] => {
            let s0 = (*b0 - *a0) / T::of((n - 1) as f64);
            let s1 = (*b1 - *a1) / T::of((n - 1) as f64);
            for i in 0..n {
                let x = *a0 + s0 * T::of(i as f64);
                for j in 0..n {
                    let y = *a1 + s1 * T::of(j as f64);
                    best = best.max(dens.log_density(&[x, y]));
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

fn boundary_max<T: Scalar, D: LogDensity<T>>(dens: &D, domain: &[(T, T)], n: usize) -> T {
    let mut best = T::neg_infinity();
    match domain {
        [(a, b)] => {
            best = best.max(dens.log_density(&[*a]));
            best = best.max(dens.log_density(&[*b]));
        }
        [(a0, b0), (a1, b1)] => {
            let s0 = (*b0 - *a0) / T::of((n - 1) as f64);
            let s1 = (*b1 - *a1) / T::of((n - 1) as f64);
            for k in 0..n {
                let x = *a0 + s0 * T::of(k as f64);
                let y = *a1 + s1 * T::of(k as f64);
                best = best.max(dens.log_density(&[x, *a1]));
                best = best.max(dens.log_density(&[x, *b1]));
                best = best.max(dens.log_density(&[*a0, y]));
                best = best.max(dens.log_density(&[*b0, y]));
            }
        }
        _ => unreachable!(),
    }
    best
}

/// Monte Carlo estimate `(mean, standard error)` of the Lyapunov moment
/// `∫ exp(λ φ(‖x‖)) dπ` over near-stationary samples.
pub fn tail_functional<T: Scalar>(samples: &[Vec<T>], lambda: T) -> Result<(T, T)> {
    if !(lambda > T::zero() && lambda.is_finite()) {
        return Err(Error::Precondition("lambda must be a positive real".into()));
    }
    if samples.is_empty() {
        return Err(Error::Precondition("tail functional of empty sample".into()));
    }
    let n = samples.len();
    let values: Vec<T> = samples
        .iter()
        .map(|x| {
            let (phi, _, _) = bump_eval(norm2(x)).expect("norm is nonnegative");
            (lambda * phi).exp()
        })
        .collect();
    let nf = T::of(n as f64);
    let mean = values.iter().fold(T::zero(), |a, &v| a + v) / nf;
    if n == 1 {
        return Ok((mean, T::zero()));
    }
    let var = values
        .iter()
        .fold(T::zero(), |a, &v| a + (v - mean) * (v - mean))
        / T::of((n - 1) as f64);
    Ok((mean, (var / nf).sqrt()))
}

/// Options for the soft-to-hard penalty comparison.
#[derive(Debug, Clone)]
pub struct PenaltyOptions<T> {
    /// Strictly increasing penalty steepness values.
    pub betas: Vec<T>,
    pub n_paths: usize,
    pub dt: T,
    pub t_obs: T,
    pub seed: u64,
    pub scheme: Scheme,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PenaltyRow<T> {
    pub beta: T,
    pub distance: T,
    pub n_paths: usize,
}

use serde::Serialize;

/// For each `β`, simulates the soft particle system with `U_β` and compares
/// its gap law at `t_obs` against the hard-recursion reference though the
/// worst per-coordinate two-sample KS distance. As `β` grows the soft law
/// approaches the hard one, so the distance column trends down to the
/// sampling noise floor.
pub fn penalty_sweep<T: Scalar>(
    mu: &[T],
    z0: &[T],
    opts: &PenaltyOptions<T>,
) -> Result<Vec<PenaltyRow<T>>> {
    if z0.len() < 2 {
        return Err(Error::Config("penalty sweep needs at least two particles".into()));
    }
    if opts.betas.is_empty() || opts.betas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Config("betas must be strictly increasing".into()));
    }
    let sim = SimOptions {
        dt: opts.dt,
        t_final: opts.t_obs,
        scheme: opts.scheme,
        noise_scale: T::one(),
    };
    let hard = SimTarget::HardParticles {
        mu: mu.to_vec(),
        z0: z0.to_vec(),
    };
    let hard_seed = rng::derive_stream(opts.seed, 0);
    let hard_ens = run_ensemble(&hard, opts.n_paths, Keep::Terminal, &sim, hard_seed)?;
    let hard_gaps = terminal_gaps(hard_ens.terminal());

    let mut rows = Vec::with_capacity(opts.betas.len());
    for (i, &beta) in opts.betas.iter().enumerate() {
        let soft = SimTarget::SoftParticles {
            mu: mu.to_vec(),
            potential: PotentialSpec::exponential(beta)?,
            z0: z0.to_vec(),
        };
        let seed = rng::derive_stream(opts.seed, (i + 1) as u64);
        let ens = run_ensemble(&soft, opts.n_paths, Keep::Terminal, &sim, seed)?;
        let soft_gaps = terminal_gaps(ens.terminal());
        let mut worst = T::zero();
        for c in 0..z0.len() - 1 {
            let xs: Vec<T> = soft_gaps.iter().map(|g| g[c]).collect();
            let ys: Vec<T> = hard_gaps.iter().map(|g| g[c]).collect();
            worst = worst.max(ks_distance_two_sample(&xs, &ys)?);
        }
        rows.push(PenaltyRow {
            beta,
            distance: worst,
            n_paths: opts.n_paths,
        });
    }
    Ok(rows)
}

fn terminal_gaps<T: Scalar>(terminal: &[Vec<T>]) -> Vec<Vec<T>> {
    terminal
        .iter()
        .map(|row| row.windows(2).map(|w| w[1] - w[0]).collect())
        .collect()
}

/// Gap trajectory re-export used by experiment drivers.
pub fn gap_trajectory<T: Scalar>(traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    gaps(traj)
}
