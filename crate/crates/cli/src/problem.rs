//! Problem files.
//!
//! ```json
//! {
//!   "divergence": "reverse_kl",
//!   "lambda": 0.5,
//!   "reference": {"type": "density1d", "name": "example1_gamma", "panels": 64},
//!   "risk": {"type": "dataset", "loss": "squared", "predictor": "linear", "data": [[1, 0]]},
//!   "tol": 1e-6
//! }
//! ```
//!
//! `divergence` may also be `{"name", "base", "scale", "slope"}`, the
//! generator `scale·f_base(x) + slope·(x − 1)`. `lambda` may be a grid
//! `{"start", "stop", "count", "scale": "linear"|"log"}`.

use std::collections::BTreeMap;

use fdr::divergences::Affine;
use fdr::measures::{Density, DiscreteMeasure, QuadratureMeasure, ReferenceMeasure, RiskSpec, Sample};
use fdr::DivergenceSpec;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Value(f64),
    Grid {
        start: f64,
        stop: f64,
        count: usize,
        scale: GridScale,
    },
}

impl LambdaSpec {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            LambdaSpec::Value(l) => vec![l],
            LambdaSpec::Grid { start, stop, count, scale } => {
                if count == 1 {
                    return vec![start];
                }
                let step = |i: usize| i as f64 / (count - 1) as f64;
                (0..count)
                    .map(|i| match scale {
                        GridScale::Linear => start + (stop - start) * step(i),
                        GridScale::Log => (start.ln() + (stop.ln() - start.ln()) * step(i)).exp(),
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub divergence: DivergenceSpec,
    pub lambda: Option<LambdaSpec>,
    pub reference: ReferenceMeasure,
    pub risk: RiskSpec,
    pub tol: Option<f64>,
    pub second_divergence: Option<DivergenceSpec>,
}

fn schema(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

fn number(v: &Value, at: &str) -> Result<f64, CliError> {
    v.as_f64().ok_or_else(|| schema(format!("{at}: expected a number, found {v}")))
}

fn count(v: &Value, at: &str) -> Result<usize, CliError> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(format!("{at}: expected a nonnegative integer, found {v}")))
}

fn numbers(v: &Value, at: &str) -> Result<Vec<f64>, CliError> {
    v.as_array()
        .ok_or_else(|| schema(format!("{at}: expected an array of numbers")))?
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{at}[{i}]")))
        .collect()
}

fn object<'a>(v: &'a Value, at: &str) -> Result<&'a Map<String, Value>, CliError> {
    v.as_object().ok_or_else(|| schema(format!("{at}: expected an object")))
}

fn text<'a>(v: &'a Value, at: &str) -> Result<&'a str, CliError> {
    v.as_str().ok_or_else(|| schema(format!("{at}: expected a string, found {v}")))
}

fn only(map: &Map<String, Value>, allowed: &[&str], at: &str) -> Result<(), CliError> {
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(format!("{at}: unknown field '{k}' (expected one of {allowed:?})"))),
        None => Ok(()),
    }
}

fn required<'a>(map: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value, CliError> {
    map.get(key).ok_or_else(|| schema(format!("{at}: missing field '{key}'")))
}

pub fn divergence(v: &Value, at: &str) -> Result<DivergenceSpec, CliError> {
    match v {
        Value::String(name) => Ok(DivergenceSpec::builtin(name)?),
        Value::Object(map) => {
            only(map, &["name", "base", "scale", "slope"], at)?;
            let base = DivergenceSpec::builtin(text(required(map, "base", at)?, &format!("{at}.base"))?)?;
            let name = match map.get("name") {
                Some(n) => text(n, &format!("{at}.name"))?.to_string(),
                None => format!("affine_{}", base.name()),
            };
            let scale = map.get("scale").map(|s| number(s, &format!("{at}.scale"))).transpose()?.unwrap_or(1.0);
            let slope = map.get("slope").map(|s| number(s, &format!("{at}.slope"))).transpose()?.unwrap_or(0.0);
            Ok(DivergenceSpec::custom(Affine::new(name, base, scale, slope)?)?)
        }
        other => Err(schema(format!("{at}: expected a builtin name or a generator object, found {other}"))),
    }
}

fn lambda(v: &Value) -> Result<LambdaSpec, CliError> {
    match v {
        Value::Number(_) => Ok(LambdaSpec::Value(number(v, "lambda")?)),
        Value::Object(map) => {
            only(map, &["start", "stop", "count", "scale"], "lambda")?;
            let start = number(required(map, "start", "lambda")?, "lambda.start")?;
            let stop = number(required(map, "stop", "lambda")?, "lambda.stop")?;
            let count = count(required(map, "count", "lambda")?, "lambda.count")?;
            let scale = match map.get("scale").map(|s| text(s, "lambda.scale")).transpose()? {
                None | Some("linear") => GridScale::Linear,
                Some("log") => GridScale::Log,
                Some(other) => return Err(schema(format!("lambda.scale: expected 'linear' or 'log', found '{other}'"))),
            };
            if count == 0 {
                return Err(schema("lambda.count: grid needs at least one point"));
            }
            if !(start > 0.0 && stop > 0.0 && start.is_finite() && stop.is_finite()) {
                return Err(schema("lambda: grid endpoints must be positive and finite"));
            }
            Ok(LambdaSpec::Grid { start, stop, count, scale })
        }
        other => Err(schema(format!("lambda: expected a number or a grid object, found {other}"))),
    }
}

fn reference(v: &Value, panels: Option<usize>) -> Result<ReferenceMeasure, CliError> {
    let map = object(v, "reference")?;
    match text(required(map, "type", "reference")?, "reference.type")? {
        "discrete" => {
            only(map, &["type", "atoms", "masses"], "reference")?;
            let masses = numbers(required(map, "masses", "reference")?, "reference.masses")?;
            let measure = match map.get("atoms") {
                None => DiscreteMeasure::indexed(masses)?,
                Some(atoms) => {
                    let atoms = atoms
                        .as_array()
                        .ok_or_else(|| schema("reference.atoms: expected an array"))?
                        .iter()
                        .enumerate()
                        .map(|(i, a)| match a {
                            Value::Number(_) => Ok(vec![number(a, &format!("reference.atoms[{i}]"))?]),
                            _ => numbers(a, &format!("reference.atoms[{i}]")),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    DiscreteMeasure::new(atoms, masses)?
                }
            };
            Ok(measure.into())
        }
        "density1d" => {
            only(map, &["type", "name", "params", "domain", "panels"], "reference")?;
            let params: BTreeMap<String, f64> = match map.get("params") {
                None => BTreeMap::new(),
                Some(p) => object(p, "reference.params")?
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), number(v, &format!("reference.params.{k}"))?)))
                    .collect::<Result<_, CliError>>()?,
            };
            let param = |key: &str, default: Option<f64>| -> Result<f64, CliError> {
                params
                    .get(key)
                    .copied()
                    .or(default)
                    .ok_or_else(|| schema(format!("reference.params: missing '{key}'")))
            };
            let name = text(required(map, "name", "reference")?, "reference.name")?;
            let (density, allowed): (Density, &[&str]) = match name {
                "example1_gamma" => (
                    Density::Gamma {
                        shape: param("shape", Some(3.0))?,
                        rate: param("rate", Some(2.0))?,
                    },
                    &["shape", "rate"],
                ),
                "uniform" => (
                    Density::Uniform {
                        lo: param("lo", None)?,
                        hi: param("hi", None)?,
                    },
                    &["lo", "hi"],
                ),
                other => {
                    return Err(schema(format!(
                        "reference.name: unknown density '{other}' (expected 'example1_gamma' or 'uniform')"
                    )))
                }
            };
            if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(schema(format!("reference.params: unknown parameter '{k}' for '{name}'")));
            }
            let domain = match map.get("domain") {
                None => None,
                Some(d) => match numbers(d, "reference.domain")?.as_slice() {
                    [a, b] => Some((*a, *b)),
                    _ => return Err(schema("reference.domain: expected [a, b]")),
                },
            };
            let file_panels = map.get("panels").map(|p| count(p, "reference.panels")).transpose()?;
            Ok(QuadratureMeasure::new(density, domain, panels.or(file_panels))?.into())
        }
        other => Err(schema(format!("reference.type: expected 'discrete' or 'density1d', found '{other}'"))),
    }
}

fn risk(v: &Value) -> Result<RiskSpec, CliError> {
    let map = object(v, "risk")?;
    match text(required(map, "type", "risk")?, "risk.type")? {
        "values" => {
            only(map, &["type", "values"], "risk")?;
            Ok(RiskSpec::Values(numbers(required(map, "values", "risk")?, "risk.values")?))
        }
        "dataset" => {
            only(map, &["type", "loss", "predictor", "data"], "risk")?;
            let loss = match map.get("loss") {
                Some(l) => text(l, "risk.loss")?.parse()?,
                None => fdr::measures::Loss::Squared,
            };
            let predictor = match map.get("predictor") {
                Some(p) => text(p, "risk.predictor")?.parse()?,
                None => fdr::measures::Predictor::Linear,
            };
            let rows = required(map, "data", "risk")?
                .as_array()
                .ok_or_else(|| schema("risk.data: expected an array of [x..., y] rows"))?;
            let data = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let row = numbers(r, &format!("risk.data[{i}]"))?;
                    match row.split_last() {
                        Some((y, x)) if !x.is_empty() => Ok(Sample::new(x.to_vec(), *y)),
                        _ => Err(schema(format!("risk.data[{i}]: a row needs at least one feature and a label"))),
                    }
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(RiskSpec::Dataset { data, loss, predictor })
        }
        other => Err(schema(format!("risk.type: expected 'values' or 'dataset', found '{other}'"))),
    }
}

/// Parses a problem file; `panels` overrides any panel count in the file.
pub fn parse(source: &str, panels: Option<usize>) -> Result<Problem, CliError> {
    let root: Value = serde_json::from_str(source).map_err(|e| schema(format!("invalid JSON: {e}")))?;
    let map = object(&root, "problem")?;
    only(
        map,
        &["divergence", "lambda", "reference", "risk", "tol", "second_divergence"],
        "problem",
    )?;
    let tol = map.get("tol").map(|t| number(t, "tol")).transpose()?;
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(schema(format!("tol: must be positive, found {t}")));
        }
    }
    if let Some(LambdaSpec::Value(l)) = map.get("lambda").map(lambda).transpose()? {
        if !(l > 0.0 && l.is_finite()) {
            return Err(schema(format!("lambda: must be positive and finite, found {l}")));
        }
    }
    Ok(Problem {
        divergence: divergence(required(map, "divergence", "problem")?, "divergence")?,
        lambda: map.get("lambda").map(lambda).transpose()?,
        reference: reference(required(map, "reference", "problem")?, panels)?,
        risk: risk(required(map, "risk", "problem")?)?,
        tol,
        second_divergence: map
            .get("second_divergence")
            .map(|d| divergence(d, "second_divergence"))
            .transpose()?,
    })
}
