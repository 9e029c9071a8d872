use grbm::sim::Scheme;
use grbm::stationary::{penalty_sweep, PenaltyOptions};
use grbm::{Error, Result};
use serde::Serialize;

use crate::config::{parse_analysis, ModelTarget, PenaltyAnalysis};
use crate::plot::LinePlot;

use super::{cell, csv, Ctx};

#[derive(Serialize)]
struct Report {
    rows: Vec<RowOut>,
    /// Count of upward steps beyond the sampling noise floor.
    inversions_above_noise: usize,
    noise_floor: f64,
}

#[derive(Serialize)]
struct RowOut {
    beta: f64,
    distance: f64,
    n_paths: usize,
}

pub fn run(ctx: &Ctx) -> Result<u8> {
    let cfg = &ctx.loaded.cfg;
    let analysis: PenaltyAnalysis = parse_analysis(&cfg.analysis, "penalty-limit")?;
    let (mu, z0) = match ctx.model()? {
        ModelTarget::Hard { mu, z0 } => (mu, z0),
        _ => {
            return Err(Error::Config(
                "penalty-limit needs a hard-particles model as the reference".into(),
            ))
        }
    };
    let opts = PenaltyOptions {
        betas: analysis.betas,
        n_paths: cfg.run.n_paths,
        dt: cfg.run.dt,
        t_obs: cfg.run.t,
        seed: cfg.run.seed,
        scheme: Scheme::TamedEuler,
    };
    let rows = penalty_sweep(&mu, &z0, &opts)?;

    let noise_floor = 1.0 / (cfg.run.n_paths as f64).sqrt();
    let inversions = rows
        .windows(2)
        .filter(|w| w[1].distance > w[0].distance + noise_floor)
        .count();
    let report = Report {
        rows: rows
            .iter()
            .map(|r| RowOut {
                beta: r.beta,
                distance: r.distance,
                n_paths: r.n_paths,
            })
            .collect(),
        inversions_above_noise: inversions,
        noise_floor,
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{body}");

    let mut writer = ctx.writer()?;
    writer.write(
        "penalty.csv",
        csv(
            "beta,distance,n_paths",
            rows.iter()
                .map(|r| vec![cell(r.beta), cell(r.distance), r.n_paths.to_string()]),
        )
        .as_bytes(),
    )?;
    writer.write("report.json", body.as_bytes())?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.beta, r.distance)).collect();
    let plot = LinePlot::new("soft-to-hard gap distance", "beta", "KS distance")
        .log_axes(true, false)
        .series("max coordinate KS", &pts);
    writer.write("penalty.svg", plot.to_svg().as_bytes())?;
    ctx.finish(writer)?;
    Ok(0)
}
