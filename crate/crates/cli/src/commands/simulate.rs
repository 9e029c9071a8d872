use grbm::sim::{run_ensemble, Keep, SimOptions};
use grbm::Result;

use crate::config::{parse_analysis, SimulateAnalysis};
use crate::plot::LinePlot;

use super::{cell, csv, Ctx};

pub fn run(ctx: &Ctx) -> Result<u8> {
    let cfg = &ctx.loaded.cfg;
    let analysis: SimulateAnalysis = parse_analysis(&cfg.analysis, "simulate")?;
    let target = ctx.model()?.sim_target(analysis.x0.as_deref())?;
    let opts = SimOptions {
        dt: cfg.run.dt,
        t_final: cfg.run.t,
        scheme: analysis.scheme,
        noise_scale: analysis.noise_scale,
    };
    let d = target.dim();
    let coords: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    let mut writer = ctx.writer()?;

    if cfg.run.n_paths <= 1 {
        let ens = run_ensemble(&target, 1, Keep::Thinned(analysis.thin.max(1)), &opts, cfg.run.seed)?;
        let traj = &ens.thinned().expect("thinned paths kept")[0];
        let header = format!("t,{}", coords.join(","));
        let body = csv(
            &header,
            (0..traj.len()).map(|row| {
                let mut cells = vec![cell(traj.time(row))];
                cells.extend(traj.state(row).iter().map(|&v| cell(v)));
                cells
            }),
        );
        writer.write("trajectory.csv", body.as_bytes())?;

        let mut plot = LinePlot::new("state trajectory", "t", "x");
        for (c, name) in coords.iter().enumerate() {
            let pts: Vec<(f64, f64)> = (0..traj.len())
                .map(|row| (traj.time(row), traj.state(row)[c]))
                .collect();
            plot = plot.series(name, &pts);
        }
        writer.write("trajectory.svg", plot.to_svg().as_bytes())?;
        println!(
            "simulate: 1 path, {} recorded rows -> {:?}",
            traj.len(),
            writer.dir()
        );
    } else {
        let ens = run_ensemble(&target, cfg.run.n_paths, Keep::Terminal, &opts, cfg.run.seed)?;
        let header = format!("path,{}", coords.join(","));
        let body = csv(
            &header,
            ens.terminal().iter().enumerate().map(|(j, state)| {
                let mut cells = vec![j.to_string()];
                cells.extend(state.iter().map(|&v| cell(v)));
                cells
            }),
        );
        writer.write("terminal.csv", body.as_bytes())?;
        println!(
            "simulate: {} paths to t = {} -> {:?}",
            cfg.run.n_paths,
            cfg.run.t,
            writer.dir()
        );
    }
    ctx.finish(writer)?;
    Ok(0)
}
