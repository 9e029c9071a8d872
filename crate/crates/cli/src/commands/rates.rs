use grbm::model::{hard_reflection_rate, soft_reflection_rate};
use grbm::{Error, Result};
use serde::Serialize;

use crate::config::{parse_analysis, RateScalingAnalysis};
use crate::plot::LinePlot;

use super::{cell, csv, log_log_slope, Ctx};

#[derive(Serialize)]
struct Report {
    rows: Vec<Row>,
    slope_hard: Option<f64>,
    slope_soft: Option<f64>,
}

#[derive(Serialize, Clone, Copy)]
struct Row {
    d: usize,
    k_hard: f64,
    k_soft: f64,
}

/// Per-dimension rate constants at pinned stability margins: the hard
/// pattern `(nu, 0, ..., 0, -nu)` has every centered partial sum equal to
/// `nu`; the soft pattern is a constant gap drift.
pub fn run(ctx: &Ctx) -> Result<u8> {
    let analysis: RateScalingAnalysis = parse_analysis(&ctx.loaded.cfg.analysis, "rate-scaling")?;
    if analysis.d_list.is_empty() {
        return Err(Error::Config("rate-scaling needs a nonempty d_list".into()));
    }
    if analysis.nu_target >= 0.0 {
        return Err(Error::Stability(format!(
            "hard pattern needs nu_target < 0, got {}",
            analysis.nu_target
        )));
    }
    if analysis.gap_target >= 0.0 {
        return Err(Error::Stability(format!(
            "soft pattern needs gap_target < 0, got {}",
            analysis.gap_target
        )));
    }
    let mut rows = Vec::with_capacity(analysis.d_list.len());
    for &d in &analysis.d_list {
        if d < 2 {
            return Err(Error::Config("rate scaling needs d >= 2".into()));
        }
        let mut mu_hard = vec![0.0; d];
        mu_hard[0] = analysis.nu_target;
        mu_hard[d - 1] = -analysis.nu_target;
        let k_hard = hard_reflection_rate(&mu_hard)?;
        let k_soft = soft_reflection_rate(&vec![analysis.gap_target; d - 1], d)?;
        rows.push(Row { d, k_hard, k_soft });
    }
    let (slope_hard, slope_soft) = if rows.len() >= 2 {
        let ds: Vec<f64> = rows.iter().map(|r| r.d as f64).collect();
        let khs: Vec<f64> = rows.iter().map(|r| r.k_hard).collect();
        let kss: Vec<f64> = rows.iter().map(|r| r.k_soft).collect();
        (
            Some(log_log_slope(&ds, &khs)),
            Some(log_log_slope(&ds, &kss)),
        )
    } else {
        (None, None)
    };

    let report = Report {
        rows: rows.clone(),
        slope_hard,
        slope_soft,
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{body}");

    let mut writer = ctx.writer()?;
    writer.write(
        "rates.csv",
        csv(
            "d,k_hard,k_soft",
            rows.iter()
                .map(|r| vec![r.d.to_string(), cell(r.k_hard), cell(r.k_soft)]),
        )
        .as_bytes(),
    )?;
    writer.write("report.json", body.as_bytes())?;
    let hard_pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.d as f64, r.k_hard)).collect();
    let soft_pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.d as f64, r.k_soft)).collect();
    let plot = LinePlot::new("certificate rates vs dimension", "d", "K")
        .log_axes(true, true)
        .series("hard reflection", &hard_pts)
        .series("soft reflection", &soft_pts);
    writer.write("rates.svg", plot.to_svg().as_bytes())?;
    ctx.finish(writer)?;
    Ok(0)
}
