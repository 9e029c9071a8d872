use grbm::lyapunov::default_lambda;
use grbm::sim::{run_ensemble, Keep, SimOptions};
use grbm::stationary::{
    freedman_diaconis_edges, ks_distance_1d, normalize_density, product_density, tail_functional,
    CdfTable, GaussLegendre, KS_CRIT_1PCT,
};
use grbm::{Error, Result};
use serde::Serialize;

use crate::config::{parse_analysis, StationaryAnalysis};
use crate::plot::LinePlot;

use super::{cell, csv, Ctx};

#[derive(Serialize)]
struct Report {
    model_digest: String,
    normalization: f64,
    lambda: f64,
    ks: Vec<f64>,
    ks_threshold: f64,
    ks_pass: bool,
    tail_mean: f64,
    tail_se: f64,
    n_paths: usize,
    t: f64,
}

pub fn run(ctx: &Ctx) -> Result<u8> {
    let cfg = &ctx.loaded.cfg;
    let analysis: StationaryAnalysis = parse_analysis(&cfg.analysis, "stationary-check")?;
    let target = ctx.model()?;
    let spec = target.grbm()?.clone();
    let d = spec.dim();
    if d > 2 {
        return Err(Error::Config(
            "stationary-check quadrature supports d <= 2".into(),
        ));
    }
    let dens = product_density(&spec)?;
    let domain: Vec<(f64, f64)> = match &analysis.quad_box {
        Some(bs) => {
            if bs.len() != d {
                return Err(Error::Config("quad_box dimension mismatch".into()));
            }
            bs.iter().map(|b| (b[0], b[1])).collect()
        }
        None => vec![(-10.0, 40.0); d],
    };
    let z = normalize_density(&dens, &domain, analysis.n_quad)?;

    let x0 = analysis.x0.clone().unwrap_or_else(|| vec![0.0; d]);
    let sim_target = target.sim_target(Some(&x0))?;
    let opts = SimOptions {
        dt: cfg.run.dt,
        t_final: cfg.run.t,
        scheme: analysis.scheme,
        noise_scale: 1.0,
    };
    let ens = run_ensemble(&sim_target, cfg.run.n_paths, Keep::Terminal, &opts, cfg.run.seed)?;
    let n = ens.n_paths();

    // The product form separates over coordinates: each marginal is the
    // 1-d factor density exp(2 U(x) + 2 c_i x), tested by one-sample KS.
    let mut ks = Vec::with_capacity(d);
    let mut marginal_tables = Vec::with_capacity(d);
    for c in 0..d {
        let lin = dens.linear_coefficients()[c];
        let pot = *spec.potential();
        let factor = move |x: f64| {
            let (u, _) = pot.eval(x);
            2.0 * (u + lin * x)
        };
        let table = CdfTable::build(factor, domain[c].0, domain[c].1, analysis.cdf_panels)?;
        let samples: Vec<f64> = ens.terminal().iter().map(|row| row[c]).collect();
        ks.push(ks_distance_1d(&samples, |x| table.eval(x))?);
        marginal_tables.push((factor, domain[c]));
    }
    let threshold = KS_CRIT_1PCT / (n as f64).sqrt();
    let ks_pass = ks.iter().all(|&v| v < threshold);

    let lambda = match analysis.lambda {
        Some(l) => l,
        None => default_lambda(&spec)?,
    };
    let (tail_mean, tail_se) = tail_functional(ens.terminal(), lambda)?;

    let report = Report {
        model_digest: spec.digest(),
        normalization: z,
        lambda,
        ks: ks.clone(),
        ks_threshold: threshold,
        ks_pass,
        tail_mean,
        tail_se,
        n_paths: n,
        t: cfg.run.t,
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{body}");

    let mut writer = ctx.writer()?;
    writer.write("report.json", body.as_bytes())?;

    // Density overlay per coordinate: analytic factor density against the
    // empirical histogram density of the terminal samples.
    let rule = GaussLegendre::new(200)?;
    let mut plot = LinePlot::new("stationary marginals", "x", "density");
    let mut density_rows: Vec<Vec<String>> = Vec::new();
    for (c, (factor, (lo, hi))) in marginal_tables.iter().enumerate() {
        let zc = rule.integrate(*lo, *hi, |x| factor(x).exp());
        let samples: Vec<f64> = ens.terminal().iter().map(|row| row[c]).collect();
        let edges = freedman_diaconis_edges(&samples, 64)?;
        let smin = samples.iter().cloned().fold(f64::INFINITY, f64::min);
        let smax = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let analytic: Vec<(f64, f64)> = (0..=400)
            .map(|k| {
                let x = smin + (smax - smin) * k as f64 / 400.0;
                (x, factor(x).exp() / zc)
            })
            .collect();
        let hist = grbm::stationary::empirical_histogram(
            &samples.iter().map(|&v| vec![v]).collect::<Vec<_>>(),
            std::slice::from_ref(&edges),
        )?;
        let empirical: Vec<(f64, f64)> = edges
            .windows(2)
            .enumerate()
            .map(|(b, w)| {
                let mid = 0.5 * (w[0] + w[1]);
                let width = w[1] - w[0];
                (mid, hist.mass()[b + 1] / width)
            })
            .collect();
        for (x, p) in &analytic {
            density_rows.push(vec![(c + 1).to_string(), cell(*x), cell(*p)]);
        }
        plot = plot
            .series(&format!("analytic x{}", c + 1), &analytic)
            .series(&format!("empirical x{}", c + 1), &empirical);
    }
    writer.write("density.svg", plot.to_svg().as_bytes())?;
    writer.write(
        "density.csv",
        csv("coord,x,density", density_rows.into_iter()).as_bytes(),
    )?;
    ctx.finish(writer)?;
    Ok(u8::from(!ks_pass))
}
