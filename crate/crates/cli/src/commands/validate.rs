use grbm::model::{validate_model, ProbeGrid, ValidationReport};
use grbm::Result;
use serde::Serialize;

use crate::config::{parse_analysis, ValidateAnalysis};

use super::Ctx;

#[derive(Serialize)]
struct Report<'a> {
    model_digest: String,
    all_ok: bool,
    #[serde(flatten)]
    checks: &'a ValidationReport<f64>,
}

pub fn run(ctx: &Ctx) -> Result<u8> {
    let analysis: ValidateAnalysis = parse_analysis(&ctx.loaded.cfg.analysis, "validate")?;
    let target = ctx.model()?;
    let spec = target.grbm()?;
    let grid = ProbeGrid {
        n_points: analysis.probe_points,
        span_factor: analysis.span_factor,
    };
    let checks = validate_model(spec, &grid)?;
    let report = Report {
        model_digest: spec.digest(),
        all_ok: checks.all_ok(),
        checks: &checks,
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{body}");

    let mut writer = ctx.writer()?;
    writer.write("report.json", body.as_bytes())?;
    ctx.finish(writer)?;
    Ok(u8::from(!checks.all_ok()))
}
