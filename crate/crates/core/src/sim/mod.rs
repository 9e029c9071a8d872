//! Time-discretized trajectory generation.
//!
//! Soft-reflection dynamics (the full diffusion and the particle system) are
//! integrated by an Euler-Maruyama step or its tamed variant; the default is
//! the tamed scheme because the exponential potential grows superlinearly on
//! the negative axis and the plain scheme can explode from extreme states.
//! Hard reflection is realized by the sequential max recursion: the first
//! particle moves freely and each follower in increasing order is clipped at
//! its (already updated) left neighbor, the one-sided Skorokhod map of the
//! driver-follower structure. Local times never appear explicitly; only
//! positions and gaps are observed.
//!
//! Every path is a pure function of `(base_seed, path_index)`, so ensembles
//! are reproducible regardless of how paths are scheduled across workers.

pub mod rng;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::model::{ModelSpec, PotentialSpec};
use crate::scalar::{all_finite, norm2, Scalar};

/// Integration scheme recorded on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    EulerMaruyama,
    TamedEuler,
    HardRecursion,
}

/// Componentwise state threshold treated as numerical blow-up.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Hard cap on the number of time steps per path.
pub const MAX_STEPS: f64 = 1e9;

/// Time-gridded state path. Rows are recorded at the step indices in
/// `steps` (always starting at 0); times are derived as `step * dt` so the
/// grid is exactly the generator's.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub dt: T,
    pub seed: u64,
    pub scheme: Scheme,
    steps: Vec<usize>,
    states: Vec<Vec<T>>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn state(&self, row: usize) -> &[T] {
        &self.states[row]
    }

    pub fn step_index(&self, row: usize) -> usize {
        self.steps[row]
    }

    pub fn time(&self, row: usize) -> T {
        T::of(self.steps[row] as f64) * self.dt
    }

    pub fn times(&self) -> Vec<T> {
        (0..self.len()).map(|r| self.time(r)).collect()
    }

    pub fn terminal(&self) -> &[T] {
        self.states.last().expect("trajectory has at least one row")
    }

    pub fn rows(&self) -> impl Iterator<Item = (T, &[T])> {
        self.steps
            .iter()
            .zip(&self.states)
            .map(|(&k, s)| (T::of(k as f64) * self.dt, s.as_slice()))
    }
}

/// What a simulation integrates: the full soft-reflection diffusion, the
/// soft particle system, or the hard (ordered) particle system.
#[derive(Debug, Clone, PartialEq)]
pub enum SimTarget<T> {
    Grbm { spec: ModelSpec<T>, x0: Vec<T> },
    SoftParticles {
        mu: Vec<T>,
        potential: PotentialSpec<T>,
        z0: Vec<T>,
    },
    HardParticles { mu: Vec<T>, z0: Vec<T> },
}

impl<T: Scalar> SimTarget<T> {
    pub fn dim(&self) -> usize {
        match self {
            Self::Grbm { x0, .. } => x0.len(),
            Self::SoftParticles { z0, .. } | Self::HardParticles { z0, .. } => z0.len(),
        }
    }

    /// Content hash of a canonical description, for provenance on ensembles.
    pub fn digest(&self) -> String {
        let desc = match self {
            Self::Grbm { spec, x0 } => format!("grbm|{}|x0={}", spec.to_json(), fmt_vec(x0)),
            Self::SoftParticles { mu, potential, z0 } => format!(
                "soft|mu={}|beta={:?}|z0={}",
                fmt_vec(mu),
                potential.beta().map(|b| format!("{b:.16e}")),
                fmt_vec(z0)
            ),
            Self::HardParticles { mu, z0 } => {
                format!("hard|mu={}|z0={}", fmt_vec(mu), fmt_vec(z0))
            }
        };
        let mut hasher = Sha256::new();
        hasher.update(desc.as_bytes());
        format!("{:x}", hasher.finalize())
    }
}

fn fmt_vec<T: Scalar>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
    format!("[{}]", parts.join(","))
}

/// Step size, horizon, scheme and the noise-scale test flag.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions<T> {
    pub dt: T,
    pub t_final: T,
    pub scheme: Scheme,
    /// Multiplies the diffusion term; `0` turns the integrator into a
    /// deterministic map for unit tests.
    pub noise_scale: T,
}

impl<T: Scalar> Default for SimOptions<T> {
    fn default() -> Self {
        Self {
            dt: T::of(1e-3),
            t_final: T::one(),
            scheme: Scheme::TamedEuler,
            noise_scale: T::one(),
        }
    }
}

impl<T: Scalar> SimOptions<T> {
    fn n_steps(&self) -> Result<usize> {
        if !(self.dt > T::zero() && self.dt <= T::of(0.1)) {
            return Err(Error::Config(format!(
                "dt must lie in (0, 0.1], got {}",
                self.dt
            )));
        }
        if !(self.t_final >= T::zero() && self.t_final.is_finite()) {
            return Err(Error::Config("t_final must be a nonnegative real".into()));
        }
        if !(self.noise_scale >= T::zero() && self.noise_scale.is_finite()) {
            return Err(Error::Config("noise_scale must be nonnegative".into()));
        }
        let ratio = (self.t_final / self.dt).as_f64();
        if ratio > MAX_STEPS {
            return Err(Error::Config(format!(
                "t_final/dt = {ratio:e} exceeds the {MAX_STEPS:e} step cap"
            )));
        }
        Ok(ratio.round() as usize)
    }
}

/// Which rows of a path are materialized.
#[derive(Debug, Clone)]
enum RecordPlan {
    Full,
    TerminalOnly,
    Thinned(usize),
    AtSteps(Vec<usize>),
}

impl RecordPlan {
    fn wants(&self, step: usize, last: usize) -> bool {
        match self {
            Self::Full => true,
            Self::TerminalOnly => step == 0 || step == last,
            Self::Thinned(k) => step.is_multiple_of(*k) || step == last,
            Self::AtSteps(list) => step == 0 || list.binary_search(&step).is_ok(),
        }
    }
}

enum NoiseShape<T> {
    Identity,
    Diagonal(Vec<T>),
    Lower(Mat<T>),
}

/// Prepared integrator for one target; reusable across paths.
struct Engine<'a, T> {
    target: &'a SimTarget<T>,
    noise: NoiseShape<T>,
    d: usize,
}

impl<'a, T: Scalar> Engine<'a, T> {
    fn new(target: &'a SimTarget<T>) -> Result<Self> {
        let d = target.dim();
        if d == 0 {
            return Err(Error::Config("simulation dimension must be positive".into()));
        }
        match target {
            SimTarget::Grbm { spec, x0 } => {
                if x0.len() != spec.dim() {
                    return Err(Error::Config(format!(
                        "x0 has length {}, model dimension is {}",
                        x0.len(),
                        spec.dim()
                    )));
                }
                if !all_finite(x0) {
                    return Err(Error::Input("x0 must be finite".into()));
                }
                let noise = noise_shape(spec.gamma())?;
                Ok(Self { target, noise, d })
            }
            SimTarget::SoftParticles { mu, z0, .. } => {
                if mu.len() != z0.len() {
                    return Err(Error::Config("mu and z0 must have equal length".into()));
                }
                if !all_finite(mu) || !all_finite(z0) {
                    return Err(Error::Input("mu and z0 must be finite".into()));
                }
                Ok(Self {
                    target,
                    noise: NoiseShape::Identity,
                    d,
                })
            }
            SimTarget::HardParticles { mu, z0 } => {
                if mu.len() != z0.len() {
                    return Err(Error::Config("mu and z0 must have equal length".into()));
                }
                if !all_finite(mu) || !all_finite(z0) {
                    return Err(Error::Input("mu and z0 must be finite".into()));
                }
                if z0.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Precondition(
                        "hard-reflection initial positions must be ordered ascending".into(),
                    ));
                }
                Ok(Self {
                    target,
                    noise: NoiseShape::Identity,
                    d,
                })
            }
        }
    }

    fn scheme(&self, opts: &SimOptions<T>) -> Result<Scheme> {
        match (self.target, opts.scheme) {
            (SimTarget::HardParticles { .. }, _) => Ok(Scheme::HardRecursion),
            (_, Scheme::HardRecursion) => Err(Error::Config(
                "hard recursion applies only to the hard particle system".into(),
            )),
            (_, s) => Ok(s),
        }
    }

    fn drift_into(&self, x: &[T], out: &mut [T]) {
        match self.target {
            SimTarget::Grbm { spec, .. } => spec.drift_into(x, out),
            SimTarget::SoftParticles { mu, potential, .. } => {
                // First particle is free; particle i is pushed away from its
                // left neighbor through U'(z_i - z_{i-1}). This indexing is
                // the one under which the gap vector solves the tridiagonal
                // soft-reflection diffusion exactly (see the step-identity
                // test); the published system is sometimes written with the
                // forward difference instead.
                out[0] = mu[0];
                for i in 1..x.len() {
                    out[i] = mu[i] + potential.u_prime(x[i] - x[i - 1]);
                }
            }
            SimTarget::HardParticles { .. } => unreachable!("hard path has its own stepper"),
        }
    }

    fn run(
        &self,
        path: u64,
        seed: u64,
        opts: &SimOptions<T>,
        plan: &RecordPlan,
    ) -> Result<Trajectory<T>> {
        let n_steps = opts.n_steps()?;
        let scheme = self.scheme(opts)?;
        let d = self.d;
        let x0 = match self.target {
            SimTarget::Grbm { x0, .. } => x0,
            SimTarget::SoftParticles { z0, .. } | SimTarget::HardParticles { z0, .. } => z0,
        };

        let mut steps = Vec::new();
        let mut states = Vec::new();
        let mut x = x0.clone();
        if plan.wants(0, n_steps) {
            steps.push(0);
            states.push(x.clone());
        }

        let sqrt_dt = opts.dt.sqrt();
        let noise_coef = opts.noise_scale * sqrt_dt;
        let silent = noise_coef == T::zero();
        let mut xi = vec![T::zero(); d];
        let mut dw = vec![T::zero(); d];
        let mut b = vec![T::zero(); d];
        let limit = T::of(BLOWUP_THRESHOLD);

        for step in 0..n_steps {
            if !silent {
                rng::fill_normals(seed, path, step as u64, &mut xi);
                match &self.noise {
                    NoiseShape::Identity => dw.copy_from_slice(&xi),
                    NoiseShape::Diagonal(sd) => {
                        for i in 0..d {
                            dw[i] = sd[i] * xi[i];
                        }
                    }
                    NoiseShape::Lower(l) => {
                        for i in 0..d {
                            let mut acc = T::zero();
                            for k in 0..=i {
                                acc += l[(i, k)] * xi[k];
                            }
                            dw[i] = acc;
                        }
                    }
                }
            }

            match scheme {
                Scheme::HardRecursion => {
                    let mu = match self.target {
                        SimTarget::HardParticles { mu, .. } => mu,
                        _ => unreachable!(),
                    };
                    x[0] = x[0] + mu[0] * opts.dt
                        + if silent { T::zero() } else { noise_coef * dw[0] };
                    for i in 1..d {
                        let free = x[i]
                            + mu[i] * opts.dt
                            + if silent { T::zero() } else { noise_coef * dw[i] };
                        x[i] = free.max(x[i - 1]);
                    }
                }
                Scheme::EulerMaruyama | Scheme::TamedEuler => {
                    self.drift_into(&x, &mut b);
                    let factor = if scheme == Scheme::TamedEuler {
                        opts.dt / (T::one() + opts.dt * norm2(&b))
                    } else {
                        opts.dt
                    };
                    for i in 0..d {
                        x[i] = x[i] + b[i] * factor
                            + if silent { T::zero() } else { noise_coef * dw[i] };
                    }
                }
            }

            if x.iter().any(|v| !v.is_finite() || v.abs() > limit) {
                return Err(Error::BlowUp {
                    step: step + 1,
                    path: Some(path),
                });
            }
            if plan.wants(step + 1, n_steps) {
                steps.push(step + 1);
                states.push(x.clone());
            }
        }

        Ok(Trajectory {
            dt: opts.dt,
            seed,
            scheme,
            steps,
            states,
        })
    }
}

fn noise_shape<T: Scalar>(gamma: &Mat<T>) -> Result<NoiseShape<T>> {
    let d = gamma.rows();
    let mut diagonal = true;
    let mut identity = true;
    for i in 0..d {
        for j in 0..d {
            let v = gamma[(i, j)];
            if i == j {
                if v != T::one() {
                    identity = false;
                }
            } else if v != T::zero() {
                diagonal = false;
                identity = false;
            }
        }
    }
    if identity {
        return Ok(NoiseShape::Identity);
    }
    if diagonal {
        let mut sd = Vec::with_capacity(d);
        for i in 0..d {
            let v = gamma[(i, i)];
            if v <= T::zero() {
                return Err(Error::Numeric(
                    "covariance diagonal must be strictly positive".into(),
                ));
            }
            sd.push(v.sqrt());
        }
        return Ok(NoiseShape::Diagonal(sd));
    }
    Ok(NoiseShape::Lower(cholesky(gamma)?))
}

/// The noise factorization used by the integrator (`L Lᵀ = Γ`).
pub use crate::linalg::cholesky;

/// Integrates the full soft-reflection diffusion from `x0`.
pub fn simulate_grbm<T: Scalar>(
    spec: &ModelSpec<T>,
    x0: &[T],
    opts: &SimOptions<T>,
    seed: u64,
) -> Result<Trajectory<T>> {
    let target = SimTarget::Grbm {
        spec: spec.clone(),
        x0: x0.to_vec(),
    };
    Engine::new(&target)?.run(0, seed, opts, &RecordPlan::Full)
}

/// Integrates the soft particle system from `z0`.
pub fn simulate_soft_particles<T: Scalar>(
    mu: &[T],
    potential: PotentialSpec<T>,
    z0: &[T],
    opts: &SimOptions<T>,
    seed: u64,
) -> Result<Trajectory<T>> {
    let target = SimTarget::SoftParticles {
        mu: mu.to_vec(),
        potential,
        z0: z0.to_vec(),
    };
    Engine::new(&target)?.run(0, seed, opts, &RecordPlan::Full)
}

/// Runs the hard-reflection recursion from ordered `z0`.
pub fn simulate_hard_particles<T: Scalar>(
    mu: &[T],
    z0: &[T],
    opts: &SimOptions<T>,
    seed: u64,
) -> Result<Trajectory<T>> {
    let target = SimTarget::HardParticles {
        mu: mu.to_vec(),
        z0: z0.to_vec(),
    };
    Engine::new(&target)?.run(0, seed, opts, &RecordPlan::Full)
}

/// Consecutive differences of a particle trajectory: the gap process.
pub fn gaps<T: Scalar>(traj: &Trajectory<T>) -> Result<Trajectory<T>> {
    if traj.dim() < 2 {
        return Err(Error::Precondition(
            "gap process needs at least two coordinates".into(),
        ));
    }
    let states = traj
        .states
        .iter()
        .map(|row| row.windows(2).map(|w| w[1] - w[0]).collect())
        .collect();
    Ok(Trajectory {
        dt: traj.dt,
        seed: traj.seed,
        scheme: traj.scheme,
        steps: traj.steps.clone(),
        states,
    })
}

/// What an ensemble retains per path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    Terminal,
    /// Every k-th step plus the endpoints.
    Thinned(usize),
}

/// Independent paths drawn from per-path substreams of one base seed.
/// Content is a pure function of `(target, options, base_seed, n_paths)`.
#[derive(Debug, Clone)]
pub struct Ensemble<T> {
    pub base_seed: u64,
    pub model_digest: String,
    terminal: Vec<Vec<T>>,
    thinned: Option<Vec<Trajectory<T>>>,
}

impl<T: Scalar> Ensemble<T> {
    pub fn n_paths(&self) -> usize {
        self.terminal.len()
    }

    pub fn terminal(&self) -> &[Vec<T>] {
        &self.terminal
    }

    pub fn thinned(&self) -> Option<&[Trajectory<T>]> {
        self.thinned.as_deref()
    }
}

/// Runs `n_paths` independent paths; results do not depend on worker count.
pub fn run_ensemble<T: Scalar>(
    target: &SimTarget<T>,
    n_paths: usize,
    keep: Keep,
    opts: &SimOptions<T>,
    base_seed: u64,
) -> Result<Ensemble<T>> {
    if n_paths == 0 {
        return Err(Error::Config("ensemble needs at least one path".into()));
    }
    let engine = Engine::new(target)?;
    let plan = match keep {
        Keep::Terminal => RecordPlan::TerminalOnly,
        Keep::Thinned(k) => {
            if k == 0 {
                return Err(Error::Config("thinning stride must be positive".into()));
            }
            RecordPlan::Thinned(k)
        }
    };
    let paths: Vec<Trajectory<T>> = (0..n_paths)
        .into_par_iter()
        .map(|j| engine.run(j as u64, base_seed, opts, &plan))
        .collect::<Result<_>>()?;
    let terminal = paths.iter().map(|p| p.terminal().to_vec()).collect();
    let thinned = match keep {
        Keep::Terminal => None,
        Keep::Thinned(_) => Some(paths),
    };
    Ok(Ensemble {
        base_seed,
        model_digest: target.digest(),
        terminal,
        thinned,
    })
}

/// Marginal samples of `n_paths` paths at the given step indices
/// (sorted ascending). Returns one `n_paths x d` block per requested step.
pub fn snapshot_ensemble<T: Scalar>(
    target: &SimTarget<T>,
    n_paths: usize,
    at_steps: &[usize],
    opts: &SimOptions<T>,
    base_seed: u64,
) -> Result<Vec<Vec<Vec<T>>>> {
    if n_paths == 0 || at_steps.is_empty() {
        return Err(Error::Config("snapshot ensemble needs paths and steps".into()));
    }
    if at_steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("snapshot steps must be strictly increasing".into()));
    }
    let n_steps = opts.n_steps()?;
    if *at_steps.last().unwrap() > n_steps {
        return Err(Error::Config(format!(
            "snapshot step {} beyond horizon of {n_steps} steps",
            at_steps.last().unwrap()
        )));
    }
    let engine = Engine::new(target)?;
    let plan = RecordPlan::AtSteps(at_steps.to_vec());
    let paths: Vec<Trajectory<T>> = (0..n_paths)
        .into_par_iter()
        .map(|j| engine.run(j as u64, base_seed, opts, &plan))
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(n_paths); at_steps.len()];
    for path in &paths {
        for (&want, slot) in at_steps.iter().zip(out.iter_mut()) {
            let row = path
                .steps
                .iter()
                .position(|&s| s == want)
                .expect("requested step was recorded");
            slot.push(path.states[row].clone());
        }
    }
    Ok(out)
}
