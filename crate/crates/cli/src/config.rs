//! Experiment configuration: strict-schema JSON with dotted `--set`
//! overrides. Unknown keys anywhere are rejected so a typo cannot silently
//! change an experiment.

use std::path::{Path, PathBuf};

use grbm::model::PotentialSpec;
use grbm::sim::{Scheme, SimTarget};
use grbm::stationary::Observable;
use grbm::{Error, Model, Result};
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Validate,
    Simulate,
    DriftCheck,
    StationaryCheck,
    Mixing,
    RateScaling,
    PenaltyLimit,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Validate => "validate",
            Self::Simulate => "simulate",
            Self::DriftCheck => "drift-check",
            Self::StationaryCheck => "stationary-check",
            Self::Mixing => "mixing",
            Self::RateScaling => "rate-scaling",
            Self::PenaltyLimit => "penalty-limit",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Model document: either the bare GRBM schema or a particle config
    /// tagged with `"type"`. Optional only for rate-scaling.
    pub model: Option<Value>,
    #[serde(default)]
    pub run: RunConfig,
    /// Kind-specific block, parsed strictly by the owning command.
    #[serde(default = "empty_object")]
    pub analysis: Value,
    pub output_dir: Option<PathBuf>,
}

fn empty_object() -> Value {
    Value::Object(serde_json::Map::new())
}

#[derive(Debug, Clone, Copy, Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub dt: f64,
    #[serde(alias = "T")]
    pub t: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t: 1.0,
            n_paths: 1,
            seed: 0,
        }
    }
}

/// Parsed model target. GRBM documents are the model module's own JSON
/// schema; particle systems carry an explicit `"type"` tag.
#[derive(Debug, Clone)]
pub enum ModelTarget {
    Grbm(Model),
    Soft {
        mu: Vec<f64>,
        potential: PotentialSpec<f64>,
        z0: Vec<f64>,
    },
    Hard {
        mu: Vec<f64>,
        z0: Vec<f64>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SoftDoc {
    #[serde(rename = "type")]
    _type: String,
    mu: Vec<f64>,
    potential: PotentialSpec<f64>,
    z0: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HardDoc {
    #[serde(rename = "type")]
    _type: String,
    mu: Vec<f64>,
    z0: Vec<f64>,
}

impl ModelTarget {
    pub fn parse(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Config("model must be a JSON object".into()))?;
        match obj.get("type").and_then(Value::as_str) {
            None => Ok(Self::Grbm(Model::from_json(&value.to_string())?)),
            Some("soft-particles") => {
                let doc: SoftDoc = serde_json::from_value(value.clone())
                    .map_err(|e| Error::Config(format!("soft-particles model: {e}")))?;
                let potential = match doc.potential {
                    PotentialSpec::Exponential { beta } => PotentialSpec::exponential(beta)?,
                    PotentialSpec::Zero => PotentialSpec::Zero,
                };
                if doc.mu.len() != doc.z0.len() {
                    return Err(Error::Config("mu and z0 must have equal length".into()));
                }
                Ok(Self::Soft {
                    mu: doc.mu,
                    potential,
                    z0: doc.z0,
                })
            }
            Some("hard-particles") => {
                let doc: HardDoc = serde_json::from_value(value.clone())
                    .map_err(|e| Error::Config(format!("hard-particles model: {e}")))?;
                if doc.mu.len() != doc.z0.len() {
                    return Err(Error::Config("mu and z0 must have equal length".into()));
                }
                Ok(Self::Hard {
                    mu: doc.mu,
                    z0: doc.z0,
                })
            }
            Some(other) => Err(Error::Config(format!("unknown model type {other:?}"))),
        }
    }

    /// Builds a simulation target; `x0` overrides the initial state and is
    /// mandatory for GRBM models (their schema carries no initial state).
    pub fn sim_target(&self, x0: Option<&[f64]>) -> Result<SimTarget<f64>> {
        match self {
            Self::Grbm(spec) => {
                let x0 = x0.ok_or_else(|| {
                    Error::Config("this experiment needs an initial state x0 in analysis".into())
                })?;
                Ok(SimTarget::Grbm {
                    spec: spec.clone(),
                    x0: x0.to_vec(),
                })
            }
            Self::Soft { mu, potential, z0 } => Ok(SimTarget::SoftParticles {
                mu: mu.clone(),
                potential: *potential,
                z0: x0.map(<[f64]>::to_vec).unwrap_or_else(|| z0.clone()),
            }),
            Self::Hard { mu, z0 } => Ok(SimTarget::HardParticles {
                mu: mu.clone(),
                z0: x0.map(<[f64]>::to_vec).unwrap_or_else(|| z0.clone()),
            }),
        }
    }

    pub fn grbm(&self) -> Result<&Model> {
        match self {
            Self::Grbm(m) => Ok(m),
            _ => Err(Error::Config(
                "this experiment needs a GRBM model, got a particle config".into(),
            )),
        }
    }
}

// ---- Kind-specific analysis blocks -------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateAnalysis {
    pub probe_points: usize,
    pub span_factor: f64,
}

impl Default for ValidateAnalysis {
    fn default() -> Self {
        Self {
            probe_points: 801,
            span_factor: 40.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateAnalysis {
    pub x0: Option<Vec<f64>>,
    pub scheme: Scheme,
    pub noise_scale: f64,
    /// Row stride for single-path CSV output.
    pub thin: usize,
}

impl Default for SimulateAnalysis {
    fn default() -> Self {
        Self {
            x0: None,
            scheme: Scheme::TamedEuler,
            noise_scale: 1.0,
            thin: 1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriftAnalysis {
    pub lambda: Option<f64>,
    pub eps: f64,
    pub n_samples: usize,
    pub r_init: f64,
    pub shell_factor: f64,
    pub r_max: f64,
}

impl Default for DriftAnalysis {
    fn default() -> Self {
        Self {
            lambda: None,
            eps: 0.05,
            n_samples: 100_000,
            r_init: 16.0,
            shell_factor: 10.0,
            r_max: (1u64 << 20) as f64,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationaryAnalysis {
    pub x0: Option<Vec<f64>>,
    /// Per-dimension quadrature box; defaults to [-10, 40] per coordinate.
    pub quad_box: Option<Vec<[f64; 2]>>,
    pub n_quad: usize,
    /// Exponent for the tail functional; defaults to the closed-form choice.
    pub lambda: Option<f64>,
    pub cdf_panels: usize,
    pub scheme: Scheme,
}

impl Default for StationaryAnalysis {
    fn default() -> Self {
        Self {
            x0: None,
            quad_box: None,
            n_quad: 2000,
            lambda: None,
            cdf_panels: 8192,
            scheme: Scheme::TamedEuler,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MixingAnalysis {
    /// Two initial states (point initial laws). Required unless sweeping.
    pub x0: Option<[Vec<f64>; 2]>,
    pub times: Vec<f64>,
    pub window: Option<[f64; 2]>,
    pub observable: Observable,
    pub max_bins: usize,
    pub scheme: Scheme,
    /// Gap-process decay-rate sweep: for each d, soft particles with
    /// mu_i = -i started tight vs spread, gap observable.
    pub sweep_d: Option<Vec<usize>>,
    /// Spacing of the spread start in the sweep.
    pub sweep_spacing: f64,
}

impl Default for MixingAnalysis {
    fn default() -> Self {
        Self {
            x0: None,
            times: Vec::new(),
            window: None,
            observable: Observable::State,
            max_bins: 64,
            scheme: Scheme::TamedEuler,
            sweep_d: None,
            sweep_spacing: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RateScalingAnalysis {
    pub d_list: Vec<usize>,
    /// Common value of the centered partial sums for the hard pattern.
    pub nu_target: f64,
    /// Common gap drift for the soft pattern.
    pub gap_target: f64,
}

impl Default for RateScalingAnalysis {
    fn default() -> Self {
        Self {
            d_list: vec![8, 16, 24, 32, 48, 64],
            nu_target: -1.0,
            gap_target: -1.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyAnalysis {
    pub betas: Vec<f64>,
}

pub fn parse_analysis<'de, A: Deserialize<'de>>(value: &'de Value, kind: &str) -> Result<A> {
    A::deserialize(value).map_err(|e| Error::Config(format!("{kind} analysis: {e}")))
}

// ---- Loading and overrides ----------------------------------------------

#[derive(Debug)]
pub struct LoadedConfig {
    pub cfg: ExperimentConfig,
    /// sha256 of the effective config (output location excluded).
    pub digest: String,
}

pub fn load(
    path: &Path,
    sets: &[String],
    seed_override: Option<u64>,
    out_override: Option<PathBuf>,
) -> Result<LoadedConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {path:?}: {e}")))?;
    let mut value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("config parse: {e}")))?;
    for assignment in sets {
        apply_set(&mut value, assignment)?;
    }
    if let Some(seed) = seed_override {
        apply_set(&mut value, &format!("run.seed={seed}"))?;
    }

    let mut hashed = value.clone();
    if let Some(obj) = hashed.as_object_mut() {
        obj.remove("output_dir");
    }
    let mut hasher = Sha256::new();
    hasher.update(hashed.to_string().as_bytes());
    let digest = format!("{:x}", hasher.finalize());

    let mut cfg: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| Error::Config(format!("config schema: {e}")))?;
    if let Some(out) = out_override {
        cfg.output_dir = Some(out);
    }
    Ok(LoadedConfig { cfg, digest })
}

/// Applies one `key.path=json-value` override; bare words that fail JSON
/// parsing are treated as strings.
fn apply_set(root: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("--set needs KEY=VALUE, got {assignment:?}")))?;
    if path.is_empty() {
        return Err(Error::Config("--set key must be nonempty".into()));
    }
    let parsed: Value = serde_json::from_str(raw).unwrap_or(Value::String(raw.to_string()));
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cursor
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("--set path {path:?}: not an object at {part:?}")))?;
        if i == parts.len() - 1 {
            obj.insert((*part).to_string(), parsed);
            return Ok(());
        }
        cursor = obj
            .entry((*part).to_string())
            .or_insert_with(empty_object);
    }
    unreachable!("loop returns on the last segment")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_overrides_nested_keys() {
        let mut v: Value = serde_json::from_str(r#"{"run":{"seed":1}}"#).unwrap();
        apply_set(&mut v, "run.seed=7").unwrap();
        apply_set(&mut v, "analysis.betas=[1,2]").unwrap();
        apply_set(&mut v, "kind=validate").unwrap();
        assert_eq!(v["run"]["seed"], 7);
        assert_eq!(v["analysis"]["betas"][1], 2);
        assert_eq!(v["kind"], "validate");
        assert!(apply_set(&mut v, "nonsense").is_err());
    }

    #[test]
    fn model_target_parses_all_three_shapes() {
        let grbm: Value = serde_json::from_str(
            r#"{"d":1,"gamma":[1.0],"mu":[-1.0],"refl":"tridiagonal",
                "potential":{"family":"exponential","beta":1.0}}"#,
        )
        .unwrap();
        assert!(matches!(ModelTarget::parse(&grbm).unwrap(), ModelTarget::Grbm(_)));

        let soft: Value = serde_json::from_str(
            r#"{"type":"soft-particles","mu":[0.0,-1.0],
                "potential":{"family":"exponential","beta":2.0},"z0":[0.0,1.0]}"#,
        )
        .unwrap();
        assert!(matches!(ModelTarget::parse(&soft).unwrap(), ModelTarget::Soft { .. }));

        let hard: Value =
            serde_json::from_str(r#"{"type":"hard-particles","mu":[0.0,-1.0],"z0":[0.0,1.0]}"#)
                .unwrap();
        assert!(matches!(ModelTarget::parse(&hard).unwrap(), ModelTarget::Hard { .. }));

        let bad: Value = serde_json::from_str(r#"{"type":"gas","mu":[0.0]}"#).unwrap();
        assert!(ModelTarget::parse(&bad).is_err());
    }

    #[test]
    fn unknown_analysis_keys_are_rejected() {
        let v: Value = serde_json::from_str(r#"{"betas":[1.0],"bogus":2}"#).unwrap();
        assert!(parse_analysis::<PenaltyAnalysis>(&v, "penalty").is_err());
    }
}
