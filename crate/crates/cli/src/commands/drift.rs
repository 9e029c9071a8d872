use grbm::lyapunov::{verify_drift, DriftOptions, DriftReport};
use grbm::Result;
use serde::Serialize;

use crate::config::{parse_analysis, DriftAnalysis};

use super::{cell, csv, Ctx};

#[derive(Serialize)]
struct Report<'a> {
    model_digest: String,
    /// Sampled certificate: evidence at the reported radii, not a proof.
    rigorous: bool,
    #[serde(flatten)]
    certificate: &'a DriftReport<f64>,
}

pub fn run(ctx: &Ctx) -> Result<u8> {
    let cfg = &ctx.loaded.cfg;
    let analysis: DriftAnalysis = parse_analysis(&cfg.analysis, "drift-check")?;
    let target = ctx.model()?;
    let spec = target.grbm()?;
    let opts = DriftOptions {
        lambda: analysis.lambda,
        eps: analysis.eps,
        n_samples: analysis.n_samples,
        r_init: analysis.r_init,
        shell_factor: analysis.shell_factor,
        r_max: analysis.r_max,
        seed: cfg.run.seed,
    };
    let cert = verify_drift(spec, &opts)?;
    let report = Report {
        model_digest: spec.digest(),
        rigorous: false,
        certificate: &cert.report,
    };
    let body = serde_json::to_string_pretty(&report).expect("report serializes");
    println!("{body}");

    let mut writer = ctx.writer()?;
    writer.write("report.json", body.as_bytes())?;
    let samples = csv(
        "idx,radius,lv_over_v",
        cert.samples
            .iter()
            .map(|s| vec![s.idx.to_string(), cell(s.radius), cell(s.lv_over_v)]),
    );
    writer.write("samples.csv", samples.as_bytes())?;
    ctx.finish(writer)?;
    Ok(u8::from(!cert.report.accepted))
}
