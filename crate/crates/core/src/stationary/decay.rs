//! Empirical total-variation decay between two ensembles started from
//! different initial laws, and the log-linear fit of its exponent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sim::{snapshot_ensemble, Scheme, SimOptions, SimTarget};

use super::hist::{empirical_histogram, freedman_diaconis_edges, tv_distance};

/// Estimator noise floor and transient cutoffs for the fit: only points
/// with `tv` strictly inside this band enter the regression.
pub const TV_FIT_FLOOR: f64 = 1e-3;
pub const TV_FIT_CEIL: f64 = 0.5;

/// Least-squares fit of `log tv` against `t` over a window.
#[derive(Debug, Clone, Serialize)]
pub struct DecayFit<T> {
    pub times: Vec<T>,
    pub tv: Vec<T>,
    /// Negated slope of the fit; the empirical decay exponent.
    pub delta: T,
    pub intercept: T,
    /// Coefficient of determination in `[0, 1]`; zero for flat data.
    pub r2: T,
    pub window: (T, T),
    /// Points that entered the regression.
    pub n_used: usize,
}

/// Fits `tv(t) ≈ exp(intercept - delta·t)` on the points inside `window`
/// whose tv value lies in `(1e-3, 0.5)`. Needs at least four usable points.
pub fn fit_decay_exponent<T: Scalar>(
    times: &[T],
    tv: &[T],
    window: (T, T),
) -> Result<DecayFit<T>> {
    if times.len() != tv.len() {
        return Err(Error::Config("times and tv must have equal length".into()));
    }
    let floor = T::of(TV_FIT_FLOOR);
    let ceil = T::of(TV_FIT_CEIL);
    let pts: Vec<(T, T)> = times
        .iter()
        .zip(tv)
        .filter(|(&t, &v)| t >= window.0 && t <= window.1 && v > floor && v < ceil)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Fit(format!(
            "need >= 4 points with tv in ({TV_FIT_FLOOR}, {TV_FIT_CEIL}) inside the window, found {}",
            pts.len()
        )));
    }
    let n = T::of(pts.len() as f64);
    let mx = pts.iter().fold(T::zero(), |a, &(t, _)| a + t) / n;
    let my = pts.iter().fold(T::zero(), |a, &(_, y)| a + y) / n;
    let sxy = pts
        .iter()
        .fold(T::zero(), |a, &(t, y)| a + (t - mx) * (y - my));
    let sxx = pts
        .iter()
        .fold(T::zero(), |a, &(t, _)| a + (t - mx) * (t - mx));
    if sxx == T::zero() {
        return Err(Error::Fit("all usable points share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sst = pts.iter().fold(T::zero(), |a, &(_, y)| a + (y - my) * (y - my));
    let ssr = pts.iter().fold(T::zero(), |a, &(t, y)| {
        let e = y - (intercept + slope * t);
        a + e * e
    });
    let r2 = if sst > T::zero() {
        (T::one() - ssr / sst).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    Ok(DecayFit {
        times: times.to_vec(),
        tv: tv.to_vec(),
        delta: -slope,
        intercept,
        r2,
        window,
        n_used: pts.len(),
    })
}

/// What the mixing comparison histograms: raw states or consecutive gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    State,
    Gaps,
}

#[derive(Debug, Clone)]
pub struct MixingOptions<T> {
    /// Observation times; each must sit on the dt-grid.
    pub times: Vec<T>,
    pub n_paths: usize,
    pub dt: T,
    pub scheme: Scheme,
    pub observable: Observable,
    /// Histogram resolution cap per dimension.
    pub max_bins: usize,
    /// Independent noise for the two ensembles; equal seeds couple them.
    pub seeds: (u64, u64),
    pub noise_scale: T,
}

impl<T: Scalar> Default for MixingOptions<T> {
    fn default() -> Self {
        Self {
            times: Vec::new(),
            n_paths: 10_000,
            dt: T::of(1e-3),
            scheme: Scheme::TamedEuler,
            observable: Observable::State,
            max_bins: 64,
            seeds: (1, 2),
            noise_scale: T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MixingPoint<T> {
    pub t: T,
    pub tv: T,
}

/// Total-variation decay curve between the laws of two ensembles.
///
/// Both ensembles are simulated on the same time grid; bin edges are fixed
/// per experiment from the pooled sample at the largest time
/// (Freedman-Diaconis, capped at `max_bins` per dimension). Observables of
/// dimension one or two are compared through their joint histogram; in
/// higher dimension the curve reports the worst coordinatewise distance,
/// the same collapse the penalty comparison uses, since joint binning is
/// hopeless there.
pub fn mixing_curve<T: Scalar>(
    a: &SimTarget<T>,
    b: &SimTarget<T>,
    opts: &MixingOptions<T>,
) -> Result<Vec<MixingPoint<T>>> {
    if a.dim() != b.dim() {
        return Err(Error::Config("mixing targets must share a dimension".into()));
    }
    if opts.times.is_empty() {
        return Err(Error::Config("mixing needs at least one time".into()));
    }
    if opts.n_paths < 2 {
        return Err(Error::Config("mixing needs at least two paths".into()));
    }
    if opts.max_bins == 0 {
        return Err(Error::Config("max_bins must be positive".into()));
    }
    let steps = times_to_steps(&opts.times, opts.dt)?;
    let t_final = *opts.times.last().unwrap();
    let sim = SimOptions {
        dt: opts.dt,
        t_final,
        scheme: opts.scheme,
        noise_scale: opts.noise_scale,
    };
    let snaps_a = snapshot_ensemble(a, opts.n_paths, &steps, &sim, opts.seeds.0)?;
    let snaps_b = snapshot_ensemble(b, opts.n_paths, &steps, &sim, opts.seeds.1)?;

    let to_obs = |rows: &[Vec<T>]| -> Result<Vec<Vec<T>>> {
        match opts.observable {
            Observable::State => Ok(rows.to_vec()),
            Observable::Gaps => {
                if a.dim() < 2 {
                    return Err(Error::Precondition(
                        "gap observable needs at least two coordinates".into(),
                    ));
                }
                Ok(rows
                    .iter()
                    .map(|r| r.windows(2).map(|w| w[1] - w[0]).collect())
                    .collect())
            }
        }
    };

    let obs_a: Vec<Vec<Vec<T>>> = snaps_a.iter().map(|s| to_obs(s)).collect::<Result<_>>()?;
    let obs_b: Vec<Vec<Vec<T>>> = snaps_b.iter().map(|s| to_obs(s)).collect::<Result<_>>()?;
    let obs_dim = obs_a[0][0].len();

    // Edges from the pooled sample at the largest time, fixed across t so
    // the discretization bias stays constant along the curve.
    let last_pool: Vec<&Vec<T>> = obs_a
        .last()
        .unwrap()
        .iter()
        .chain(obs_b.last().unwrap().iter())
        .collect();
    let edges_for = |coord: usize| -> Result<Vec<T>> {
        let column: Vec<T> = last_pool.iter().map(|r| r[coord]).collect();
        freedman_diaconis_edges(&column, opts.max_bins)
    };

    let mut curve = Vec::with_capacity(opts.times.len());
    if obs_dim <= 2 {
        let edges: Vec<Vec<T>> = (0..obs_dim).map(edges_for).collect::<Result<_>>()?;
        for (ti, &t) in opts.times.iter().enumerate() {
            let ha = empirical_histogram(&obs_a[ti], &edges)?;
            let hb = empirical_histogram(&obs_b[ti], &edges)?;
            curve.push(MixingPoint {
                t,
                tv: tv_distance(&ha, &hb)?,
            });
        }
    } else {
        let coord_edges: Vec<Vec<T>> = (0..obs_dim).map(edges_for).collect::<Result<_>>()?;
        for (ti, &t) in opts.times.iter().enumerate() {
            let mut worst = T::zero();
            for c in 0..obs_dim {
                let col_a: Vec<Vec<T>> = obs_a[ti].iter().map(|r| vec![r[c]]).collect();
                let col_b: Vec<Vec<T>> = obs_b[ti].iter().map(|r| vec![r[c]]).collect();
                let edges = std::slice::from_ref(&coord_edges[c]);
                let ha = empirical_histogram(&col_a, edges)?;
                let hb = empirical_histogram(&col_b, edges)?;
                worst = worst.max(tv_distance(&ha, &hb)?);
            }
            curve.push(MixingPoint { t, tv: worst });
        }
    }
    Ok(curve)
}

fn times_to_steps<T: Scalar>(times: &[T], dt: T) -> Result<Vec<usize>> {
    let mut steps = Vec::with_capacity(times.len());
    for &t in times {
        if !(t > T::zero() && t.is_finite()) {
            return Err(Error::Config("mixing times must be positive reals".into()));
        }
        let k = (t / dt).as_f64().round();
        let snapped = T::of(k) * dt;
        if (snapped - t).abs() > T::of(1e-9) * t.max(T::one()) {
            return Err(Error::Config(format!(
                "time {t} does not sit on the dt grid"
            )));
        }
        steps.push(k as usize);
    }
    if steps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("times must be strictly increasing".into()));
    }
    Ok(steps)
}
