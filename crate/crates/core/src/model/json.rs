//! Canonical JSON serialization of model specifications.
//!
//! The document has keys `d`, `gamma` (row-major), `mu`, `refl` (either the
//! string `"tridiagonal"` or a row-major array), and `potential`
//! (`{"family", "beta"}`). The writer emits every floating-point entry as a
//! decimal with 17 significant digits, so matrices round-trip bit-exactly.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

use super::{tridiagonal_reflection, ModelSpec, PotentialSpec};

pub(super) fn to_json<T: Scalar>(spec: &ModelSpec<T>) -> String {
    let mut out = String::new();
    out.push_str("{\"d\":");
    let _ = write!(out, "{}", spec.dim());
    out.push_str(",\"gamma\":");
    push_array(&mut out, spec.gamma().data());
    out.push_str(",\"mu\":");
    push_array(&mut out, spec.mu());
    out.push_str(",\"refl\":");
    if spec.has_tridiagonal_reflection() {
        out.push_str("\"tridiagonal\"");
    } else {
        push_array(&mut out, spec.refl().data());
    }
    out.push_str(",\"potential\":");
    match spec.potential() {
        PotentialSpec::Exponential { beta } => {
            out.push_str("{\"family\":\"exponential\",\"beta\":");
            out.push_str(&sig17(*beta));
            out.push('}');
        }
        PotentialSpec::Zero => out.push_str("{\"family\":\"zero\"}"),
    }
    out.push('}');
    out
}

fn push_array<T: Scalar>(out: &mut String, values: &[T]) {
    out.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&sig17(*v));
    }
    out.push(']');
}

/// 17-significant-digit decimal form; parses back to the identical bits.
fn sig17<T: Scalar>(v: T) -> String {
    format!("{v:.16e}")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc<T> {
    d: usize,
    gamma: Vec<T>,
    mu: Vec<T>,
    refl: ReflDoc<T>,
    potential: PotentialDoc<T>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ReflDoc<T> {
    Shorthand(String),
    Dense(Vec<T>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialDoc<T> {
    family: String,
    beta: Option<T>,
}

pub(super) fn from_json<T: Scalar>(text: &str) -> Result<ModelSpec<T>> {
    let doc: ModelDoc<T> =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("model JSON: {e}")))?;
    let d = doc.d;
    if d == 0 {
        return Err(Error::Config("model JSON: d must be positive".into()));
    }
    if doc.mu.len() != d {
        return Err(Error::Config(format!(
            "model JSON: mu has length {}, expected {d}",
            doc.mu.len()
        )));
    }
    let gamma = Mat::from_row_major(d, d, doc.gamma)
        .map_err(|_| Error::Config(format!("model JSON: gamma must have {} entries", d * d)))?;
    let refl = match doc.refl {
        ReflDoc::Shorthand(s) if s == "tridiagonal" => tridiagonal_reflection(d),
        ReflDoc::Shorthand(s) => {
            return Err(Error::Config(format!(
                "model JSON: unknown reflection shorthand {s:?}"
            )))
        }
        ReflDoc::Dense(v) => Mat::from_row_major(d, d, v)
            .map_err(|_| Error::Config(format!("model JSON: refl must have {} entries", d * d)))?,
    };
    let potential = match doc.potential.family.as_str() {
        "exponential" => {
            let beta = doc.potential.beta.ok_or_else(|| {
                Error::Config("model JSON: exponential potential needs a beta".into())
            })?;
            PotentialSpec::exponential(beta)?
        }
        "zero" => PotentialSpec::Zero,
        other => {
            return Err(Error::Config(format!(
                "model JSON: unknown potential family {other:?}"
            )))
        }
    };
    ModelSpec::new(gamma, doc.mu, refl, potential)
}
