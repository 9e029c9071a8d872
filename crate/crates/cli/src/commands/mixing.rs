use grbm::model::PotentialSpec;
use grbm::sim::{rng, SimTarget};
use grbm::stationary::{fit_decay_exponent, mixing_curve, DecayFit, MixingOptions, Observable};
use grbm::{Error, Result};
use serde::Serialize;

use crate::config::{parse_analysis, MixingAnalysis, ModelTarget};
use crate::plot::LinePlot;

use super::{cell, csv, Ctx};

#[derive(Serialize)]
struct SweepRow {
    d: usize,
    delta: f64,
    r2: f64,
    n_paths: usize,
}

pub fn run(ctx: &Ctx) -> Result<u8> {
    let cfg = &ctx.loaded.cfg;
    let analysis: MixingAnalysis = parse_analysis(&cfg.analysis, "mixing")?;
    if analysis.times.is_empty() {
        return Err(Error::Config("mixing needs a nonempty times grid".into()));
    }
    let window = analysis
        .window
        .map(|w| (w[0], w[1]))
        .unwrap_or((0.0, f64::INFINITY));
    let seed = cfg.run.seed;
    let mut writer = ctx.writer()?;

    if let Some(d_list) = &analysis.sweep_d {
        // Decay-rate table over gap processes: soft particles with
        // mu_i = -i started tight versus spread, gap observable.
        let potential = sweep_potential(ctx)?;
        let mut rows = Vec::new();
        let mut fits = Vec::new();
        for (di, &d) in d_list.iter().enumerate() {
            if d < 2 {
                return Err(Error::Config("sweep dimensions must be >= 2".into()));
            }
            let mu: Vec<f64> = (1..=d).map(|i| -(i as f64)).collect();
            let tight = SimTarget::SoftParticles {
                mu: mu.clone(),
                potential,
                z0: vec![0.0; d],
            };
            let spread = SimTarget::SoftParticles {
                mu,
                potential,
                z0: (0..d).map(|i| i as f64 * analysis.sweep_spacing).collect(),
            };
            let opts = MixingOptions {
                times: analysis.times.clone(),
                n_paths: cfg.run.n_paths,
                dt: cfg.run.dt,
                scheme: analysis.scheme,
                observable: Observable::Gaps,
                max_bins: analysis.max_bins,
                seeds: (
                    rng::derive_stream(seed, 2 * di as u64),
                    rng::derive_stream(seed, 2 * di as u64 + 1),
                ),
                noise_scale: 1.0,
            };
            let curve = mixing_curve(&tight, &spread, &opts)?;
            let times: Vec<f64> = curve.iter().map(|p| p.t).collect();
            let tvs: Vec<f64> = curve.iter().map(|p| p.tv).collect();
            writer.write(
                &format!("decay_d{d}.csv"),
                csv(
                    "t,tv,n_paths",
                    curve
                        .iter()
                        .map(|p| vec![cell(p.t), cell(p.tv), cfg.run.n_paths.to_string()]),
                )
                .as_bytes(),
            )?;
            let fit = fit_decay_exponent(&times, &tvs, window)?;
            rows.push(SweepRow {
                d,
                delta: fit.delta,
                r2: fit.r2,
                n_paths: cfg.run.n_paths,
            });
            fits.push((d, fit));
        }
        writer.write(
            "sweep.csv",
            csv(
                "d,delta,r2,n_paths",
                rows.iter().map(|r| {
                    vec![
                        r.d.to_string(),
                        cell(r.delta),
                        cell(r.r2),
                        r.n_paths.to_string(),
                    ]
                }),
            )
            .as_bytes(),
        )?;
        let body = serde_json::to_string_pretty(&rows).expect("rows serialize");
        writer.write("report.json", body.as_bytes())?;
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.d as f64, r.delta)).collect();
        let plot = LinePlot::new("decay exponent vs dimension", "d", "delta")
            .log_axes(true, true)
            .series("delta(d)", &pts);
        writer.write("sweep.svg", plot.to_svg().as_bytes())?;
        println!("{body}");
        ctx.finish(writer)?;
        return Ok(0);
    }

    let x0 = analysis
        .x0
        .as_ref()
        .ok_or_else(|| Error::Config("mixing needs an x0 pair (or sweep_d)".into()))?;
    let model = ctx.model()?;
    let a = model.sim_target(Some(&x0[0]))?;
    let b = model.sim_target(Some(&x0[1]))?;
    let opts = MixingOptions {
        times: analysis.times.clone(),
        n_paths: cfg.run.n_paths,
        dt: cfg.run.dt,
        scheme: analysis.scheme,
        observable: analysis.observable,
        max_bins: analysis.max_bins,
        seeds: (rng::derive_stream(seed, 1), rng::derive_stream(seed, 2)),
        noise_scale: 1.0,
    };
    let curve = mixing_curve(&a, &b, &opts)?;
    let times: Vec<f64> = curve.iter().map(|p| p.t).collect();
    let tvs: Vec<f64> = curve.iter().map(|p| p.tv).collect();
    writer.write(
        "decay.csv",
        csv(
            "t,tv,n_paths",
            curve
                .iter()
                .map(|p| vec![cell(p.t), cell(p.tv), cfg.run.n_paths.to_string()]),
        )
        .as_bytes(),
    )?;
    let fit: DecayFit<f64> = fit_decay_exponent(&times, &tvs, window)?;
    let body = serde_json::to_string_pretty(&fit).expect("fit serializes");
    writer.write("fit.json", body.as_bytes())?;
    let pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.t, p.tv)).collect();
    let plot = LinePlot::new("total-variation decay", "t", "tv")
        .log_axes(false, true)
        .series("tv(t)", &pts);
    writer.write("decay.svg", plot.to_svg().as_bytes())?;
    println!(
        "mixing: delta = {:.4}, r2 = {:.3}, {} usable points",
        fit.delta, fit.r2, fit.n_used
    );
    ctx.finish(writer)?;
    Ok(0)
}

fn sweep_potential(ctx: &Ctx) -> Result<PotentialSpec<f64>> {
    match ctx.loaded.cfg.model.as_ref() {
        None => PotentialSpec::exponential(1.0),
        Some(v) => match ModelTarget::parse(v)? {
            ModelTarget::Soft { potential, .. } => Ok(potential),
            ModelTarget::Grbm(spec) => Ok(*spec.potential()),
            ModelTarget::Hard { .. } => Err(Error::Config(
                "sweep needs a soft potential; hard-particles model has none".into(),
            )),
        },
    }
}
