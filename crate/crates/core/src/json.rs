//! JSON encoding of the public types.
//!
//! Scalars are emitted as JSON numbers in float mode and as `"p/q"` strings
//! in exact mode; parsing accepts numbers, fractions, and decimal strings in
//! both modes, so emitted files always round-trip to equal values.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::extension::ExtensionProblem;
use crate::free::{Coupling, DeLeeuwMeasure, FreeElement, LipschitzFunction, PointMeasure};
use crate::metric::{FiniteMetricSpace, SegmentSet};
use crate::monotonicity::MonotonicityCertificate;
use crate::num::Scalar;

pub fn scalar_to_value<S: Scalar>(v: &S) -> Value {
    if S::EXACT {
        Value::String(v.to_text())
    } else {
        serde_json::Number::from_f64(v.to_f64())
            .map(Value::Number)
            .unwrap_or_else(|| Value::String(v.to_text()))
    }
}

pub fn scalar_from_value<S: Scalar>(v: &Value) -> Result<S> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                return Ok(S::from_int(i));
            }
            let x = n
                .as_f64()
                .ok_or_else(|| Error::Parse(format!("unusable number {n}")))?;
            S::from_f64(x).ok_or_else(|| Error::Parse(format!("non-finite number {n}")))
        }
        Value::String(s) => S::parse_text(s),
        other => Err(Error::Parse(format!("expected a number, got {other}"))),
    }
}

fn field<'v>(obj: &'v Value, name: &str) -> Result<&'v Value> {
    obj.get(name)
        .ok_or_else(|| Error::Parse(format!("missing field {name:?}")))
}

fn as_array<'v>(v: &'v Value, what: &str) -> Result<&'v Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

fn as_object<'v>(v: &'v Value, what: &str) -> Result<&'v Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Parse(format!("{what} must be an object")))
}

fn as_index(v: &Value, what: &str) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::Parse(format!("{what} must be a nonnegative integer")))
}

/// `{"labels": [...], "dist": [[...]], "base": 0}` or
/// `{"line": [...], "base": 0}`. Line-built spaces serialize back to the
/// line form.
pub fn space_to_value<S: Scalar>(space: &FiniteMetricSpace<S>) -> Value {
    match space.line_coords() {
        Some(coords) => json!({
            "labels": space.labels(),
            "line": coords.iter().map(scalar_to_value).collect::<Vec<_>>(),
            "base": space.base(),
        }),
        None => json!({
            "labels": space.labels(),
            "dist": space
                .matrix()
                .iter()
                .map(|row| row.iter().map(scalar_to_value).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "base": space.base(),
        }),
    }
}

pub fn space_from_value<S: Scalar>(v: &Value) -> Result<FiniteMetricSpace<S>> {
    let obj = as_object(v, "space")?;
    let base = match obj.get("base") {
        Some(b) => as_index(b, "base")?,
        None => 0,
    };
    if let Some(line) = obj.get("line") {
        let coords = as_array(line, "line")?
            .iter()
            .map(scalar_from_value)
            .collect::<Result<Vec<S>>>()?;
        return FiniteMetricSpace::from_line_points(coords, base);
    }
    let dist_v = field(v, "dist")?;
    let dist = as_array(dist_v, "dist")?
        .iter()
        .map(|row| {
            as_array(row, "dist row")?
                .iter()
                .map(scalar_from_value)
                .collect::<Result<Vec<S>>>()
        })
        .collect::<Result<Vec<Vec<S>>>>()?;
    match obj.get("labels") {
        Some(labels) => {
            let labels = as_array(labels, "labels")?
                .iter()
                .map(|l| {
                    l.as_str()
                        .map(str::to_owned)
                        .ok_or_else(|| Error::Parse("labels must be strings".into()))
                })
                .collect::<Result<Vec<String>>>()?;
            FiniteMetricSpace::new(labels, dist, base)
        }
        None => FiniteMetricSpace::from_matrix(dist, base),
    }
}

/// `{"weights": {"1": 1, "2": -2}}`.
pub fn element_to_value<S: Scalar>(m: &FreeElement<S>) -> Value {
    let mut weights = Map::new();
    for (i, w) in m.weights() {
        weights.insert(i.to_string(), scalar_to_value(w));
    }
    json!({ "weights": weights })
}

pub fn element_from_value<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    v: &Value,
) -> Result<FreeElement<S>> {
    let weights = as_object(field(v, "weights")?, "weights")?;
    let parsed = weights
        .iter()
        .map(|(k, w)| {
            let i: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad point index {k:?}")))?;
            Ok((i, scalar_from_value(w)?))
        })
        .collect::<Result<Vec<(usize, S)>>>()?;
    FreeElement::from_weights(space, parsed)
}

/// Same shape as a free element, but nonnegative and base mass allowed.
pub fn point_measure_to_value<S: Scalar>(m: &PointMeasure<S>) -> Value {
    let mut weights = Map::new();
    for (i, w) in m.weights() {
        weights.insert(i.to_string(), scalar_to_value(w));
    }
    json!({ "weights": weights })
}

pub fn point_measure_from_value<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    v: &Value,
) -> Result<PointMeasure<S>> {
    let weights = as_object(field(v, "weights")?, "weights")?;
    let parsed = weights
        .iter()
        .map(|(k, w)| {
            let i: usize = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad point index {k:?}")))?;
            Ok((i, scalar_from_value(w)?))
        })
        .collect::<Result<Vec<(usize, S)>>>()?;
    PointMeasure::from_weights(space, parsed)
}

/// `{"values": [...]}`.
pub fn function_to_value<S: Scalar>(f: &LipschitzFunction<S>) -> Value {
    json!({ "values": f.values().iter().map(scalar_to_value).collect::<Vec<_>>() })
}

pub fn function_from_value<S: Scalar>(v: &Value) -> Result<LipschitzFunction<S>> {
    let values = as_array(field(v, "values")?, "values")?
        .iter()
        .map(scalar_from_value)
        .collect::<Result<Vec<S>>>()?;
    Ok(LipschitzFunction::new(values))
}

/// `{"pairs": [{"x": 1, "y": 2, "w": 1}, ...]}`, sorted by pair.
pub fn measure_to_value<S: Scalar>(mu: &DeLeeuwMeasure<S>) -> Value {
    let pairs: Vec<Value> = mu
        .pairs()
        .map(|((x, y), w)| json!({ "x": x, "y": y, "w": scalar_to_value(w) }))
        .collect();
    json!({ "pairs": pairs })
}

pub fn measure_from_value<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    v: &Value,
) -> Result<DeLeeuwMeasure<S>> {
    let pairs = as_array(field(v, "pairs")?, "pairs")?
        .iter()
        .map(|p| {
            let x = as_index(field(p, "x")?, "x")?;
            let y = as_index(field(p, "y")?, "y")?;
            let w = scalar_from_value(field(p, "w")?)?;
            Ok(((x, y), w))
        })
        .collect::<Result<Vec<((usize, usize), S)>>>()?;
    DeLeeuwMeasure::from_pairs(space, pairs)
}

/// Couplings share the pair-list shape; diagonal entries are allowed.
pub fn coupling_to_value<S: Scalar>(pi: &Coupling<S>) -> Value {
    let pairs: Vec<Value> = pi
        .pairs()
        .map(|((x, y), w)| json!({ "x": x, "y": y, "w": scalar_to_value(w) }))
        .collect();
    json!({ "pairs": pairs })
}

pub fn coupling_from_value<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    v: &Value,
) -> Result<Coupling<S>> {
    let pairs = as_array(field(v, "pairs")?, "pairs")?
        .iter()
        .map(|p| {
            let x = as_index(field(p, "x")?, "x")?;
            let y = as_index(field(p, "y")?, "y")?;
            let w = scalar_from_value(field(p, "w")?)?;
            Ok(((x, y), w))
        })
        .collect::<Result<Vec<((usize, usize), S)>>>()?;
    Coupling::from_pairs(space, pairs)
}

pub fn segment_set_to_value(s: &SegmentSet) -> Value {
    Value::Array(s.iter().map(|i| json!(i)).collect())
}

/// `{"a": [0, 3], "values": [0, null-ish..., 3]}`: values outside `a` are
/// ignored (the caller may warn). A map form `{"values": {"0": 0}}` is also
/// accepted, in which case `a` is implied by the keys.
pub fn extension_problem_from_value<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    v: &Value,
) -> Result<(ExtensionProblem<S>, bool)> {
    let values_v = field(v, "values")?;
    if let Some(map) = values_v.as_object() {
        let parsed = map
            .iter()
            .map(|(k, w)| {
                let i: usize = k
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad point index {k:?}")))?;
                Ok((i, scalar_from_value(w)?))
            })
            .collect::<Result<BTreeMap<usize, S>>>()?;
        return Ok((ExtensionProblem::new(space, parsed)?, false));
    }
    let values = as_array(values_v, "values")?;
    let a = as_array(field(v, "a")?, "a")?
        .iter()
        .map(|i| as_index(i, "anchor index"))
        .collect::<Result<Vec<usize>>>()?;
    let mut prescribed = BTreeMap::new();
    for &i in &a {
        let entry = values
            .get(i)
            .ok_or_else(|| Error::Parse(format!("values has no entry for point {i}")))?;
        prescribed.insert(i, scalar_from_value::<S>(entry)?);
    }
    // flag when positions outside `a` carry nonzero values, so the CLI can warn
    let mut extra_ignored = false;
    for (i, entry) in values.iter().enumerate() {
        if !a.contains(&i) && !entry.is_null() {
            if let Ok(x) = scalar_from_value::<S>(entry) {
                if !x.is_zero() {
                    extra_ignored = true;
                }
            }
        }
    }
    Ok((ExtensionProblem::new(space, prescribed)?, extra_ignored))
}

pub fn extension_problem_to_value<S: Scalar>(p: &ExtensionProblem<S>) -> Value {
    let mut values = Map::new();
    for (i, v) in p.prescribed() {
        values.insert(i.to_string(), scalar_to_value(v));
    }
    json!({ "values": values })
}

pub fn certificate_to_value<S: Scalar>(c: &MonotonicityCertificate<S>) -> Value {
    let mut obj = Map::new();
    obj.insert("monotone".into(), Value::Bool(c.monotone));
    if let Some(w) = &c.witness {
        obj.insert("witness".into(), function_to_value(w));
    }
    if let Some(cycle) = &c.violating_cycle {
        obj.insert(
            "cycle".into(),
            Value::Array(
                cycle
                    .iter()
                    .map(|&(x, y)| json!({ "x": x, "y": y }))
                    .collect(),
            ),
        );
    }
    Value::Object(obj)
}
