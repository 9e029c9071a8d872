//! One module per subcommand. Every command reads the strict config,
//! computes, writes its artifacts through [`ArtifactWriter`] (manifest
//! last), prints a one-line summary, and returns the process exit code:
//! 0 success, 1 domain failure (failed validation, rejected certificate),
//! with usage and blow-up classes raised as errors upstream.

pub mod drift;
pub mod mixing;
pub mod penalty;
pub mod rates;
pub mod simulate;
pub mod stationary;
pub mod validate;

use std::fmt::Write as _;
use std::path::PathBuf;

use grbm::{Error, Result};

use crate::config::{LoadedConfig, ModelTarget};
use crate::manifest::ArtifactWriter;

pub struct Ctx<'a> {
    pub loaded: &'a LoadedConfig,
}

impl Ctx<'_> {
    pub fn out_dir(&self) -> Result<PathBuf> {
        self.loaded
            .cfg
            .output_dir
            .clone()
            .ok_or_else(|| Error::Config("no output directory (config output_dir or --out)".into()))
    }

    pub fn writer(&self) -> Result<ArtifactWriter> {
        ArtifactWriter::new(self.out_dir()?)
    }

    pub fn model(&self) -> Result<ModelTarget> {
        let value = self
            .loaded
            .cfg
            .model
            .as_ref()
            .ok_or_else(|| Error::Config("this experiment needs a model".into()))?;
        ModelTarget::parse(value)
    }

    pub fn finish(&self, writer: ArtifactWriter) -> Result<()> {
        writer.finish(&self.loaded.digest, self.loaded.cfg.run.seed)
    }
}

/// CSV from a header and rows of display-formatted cells (shortest
/// round-trip decimal for floats via `Display`).
pub fn csv(header: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{header}");
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

pub fn cell(v: f64) -> String {
    format!("{v}")
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
