//! JSON instance files.
//!
//! ```json
//! {"d": 2,
//!  "X": [{"label": "a", "coords": [0]}, {"label": "b"}],
//!  "Y": [{"label": "p"}],
//!  "mu": [["1/2", "1/2"], [0.25, 0.75]],
//!  "nu": [["1"], ["1"]],
//!  "eta": ["1/2", "1/2"],
//!  "cost": [[0], [1]]}
//! ```
//!
//! Numbers may be `"p/q"` strings or JSON numbers; numbers are read from
//! their decimal text, so `0.1` is exactly `1/10`.

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::measures::{DiscreteVectorMeasure, ReferenceMeasure, SupportPoint};
use crate::monge::RefugeeInstance;
use crate::scalar::{parse_rational, Rational, Scalar};
use crate::solver::CostMatrix;

pub const SCHEMA: &str = "sot/1";

#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S = Rational> {
    pub mu: DiscreteVectorMeasure<S>,
    pub nu: DiscreteVectorMeasure<S>,
    pub eta: ReferenceMeasure<S>,
    pub cost: Option<CostMatrix<S>>,
}

impl<S: Scalar> Instance<S> {
    pub fn cost(&self) -> Result<&CostMatrix<S>> {
        self.cost
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("instance has no cost matrix".into()))
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

pub fn rational_from_json(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(invalid(format!("expected a number, found {other}"))),
    }
}

pub fn scalar_from_json<S: Scalar>(v: &Value) -> Result<S> {
    Ok(S::from_rational(&rational_from_json(v)?))
}

pub fn vector_from_json<S: Scalar>(v: &Value, what: &str) -> Result<Vec<S>> {
    v.as_array()
        .ok_or_else(|| invalid(format!("{what} must be an array")))?
        .iter()
        .map(scalar_from_json)
        .collect()
}

pub fn matrix_from_json<S: Scalar>(v: &Value, what: &str) -> Result<Vec<Vec<S>>> {
    v.as_array()
        .ok_or_else(|| invalid(format!("{what} must be an array of arrays")))?
        .iter()
        .map(|row| vector_from_json(row, what))
        .collect()
}

fn support_from_json(v: Option<&Value>, len: usize, side: &str) -> Result<Vec<SupportPoint>> {
    let Some(v) = v else {
        return Ok((0..len).map(|i| SupportPoint::new(i.to_string())).collect());
    };
    let points = v
        .as_array()
        .ok_or_else(|| invalid(format!("{side} must be an array of points")))?;
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let label = match p.get("label") {
                Some(Value::String(s)) => s.clone(),
                Some(other) => other.to_string(),
                None => i.to_string(),
            };
            match p.get("coords") {
                None | Some(Value::Null) => Ok(SupportPoint::new(label)),
                Some(c) => Ok(SupportPoint::with_coords(label, vector_from_json(c, "coords")?)),
            }
        })
        .collect()
}

fn measure_from_json<S: Scalar>(
    obj: &Map<String, Value>,
    weights_key: &str,
    support_key: &str,
    d: Option<usize>,
) -> Result<DiscreteVectorMeasure<S>> {
    let weights = matrix_from_json::<S>(
        obj.get(weights_key)
            .ok_or_else(|| invalid(format!("missing {weights_key:?}")))?,
        weights_key,
    )?;
    if let Some(d) = d {
        if weights.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{weights_key} has {} components but d = {d}",
                weights.len()
            )));
        }
    }
    let len = weights.first().map_or(0, Vec::len);
    let support = support_from_json(obj.get(support_key), len, support_key)?;
    DiscreteVectorMeasure::new(support, weights)
}

pub fn parse_instance<S: Scalar>(text: &str) -> Result<Instance<S>> {
    let v: Value = serde_json::from_str(text).map_err(|e| invalid(format!("bad JSON: {e}")))?;
    instance_from_value(&v)
}

pub fn instance_from_value<S: Scalar>(v: &Value) -> Result<Instance<S>> {
    let obj = v.as_object().ok_or_else(|| invalid("instance must be a JSON object"))?;
    let d = match obj.get("d") {
        Some(d) => Some(
            d.as_u64()
                .filter(|&d| d > 0)
                .ok_or_else(|| invalid("d must be a positive integer"))? as usize,
        ),
        None => None,
    };
    let mu = measure_from_json::<S>(obj, "mu", "X", d)?;
    let nu = measure_from_json::<S>(obj, "nu", "Y", d)?;
    let eta = match obj.get("eta") {
        Some(e) => ReferenceMeasure::new(vector_from_json(e, "eta")?, &mu)?,
        None => ReferenceMeasure::mubar(&mu)?,
    };
    let cost = match obj.get("cost") {
        Some(c) => Some(CostMatrix::new(matrix_from_json(c, "cost")?)?),
        None => None,
    };
    Ok(Instance { mu, nu, eta, cost })
}

/// Production matrix: a bare array of rows or `{"production": [...]}`.
pub fn parse_matrix<S: Scalar>(text: &str, key: &str) -> Result<Vec<Vec<S>>> {
    let v: Value = serde_json::from_str(text).map_err(|e| invalid(format!("bad JSON: {e}")))?;
    match &v {
        Value::Array(_) => matrix_from_json(&v, key),
        Value::Object(o) => matrix_from_json(
            o.get(key).ok_or_else(|| invalid(format!("missing {key:?}")))?,
            key,
        ),
        _ => Err(invalid(format!("{key} must be a matrix"))),
    }
}

/// `{"families": [{"id", "q": [..]}], "affiliates": [{"id", "floors": [..]}], "scores": [[..]]}`.
pub fn parse_refugee<S: Scalar>(text: &str) -> Result<RefugeeInstance<S>> {
    let v: Value = serde_json::from_str(text).map_err(|e| invalid(format!("bad JSON: {e}")))?;
    let list = |key: &str| -> Result<&Vec<Value>> {
        v.get(key)
            .and_then(Value::as_array)
            .ok_or_else(|| invalid(format!("missing array {key:?}")))
    };
    let id = |e: &Value, i: usize| match e.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
        None => i.to_string(),
    };
    let mut family_ids = Vec::new();
    let mut q = Vec::new();
    for (i, f) in list("families")?.iter().enumerate() {
        family_ids.push(id(f, i));
        q.push(vector_from_json(f.get("q").ok_or_else(|| invalid("family without q"))?, "q")?);
    }
    let mut affiliate_ids = Vec::new();
    let mut floors = Vec::new();
    for (i, a) in list("affiliates")?.iter().enumerate() {
        affiliate_ids.push(id(a, i));
        floors.push(vector_from_json(
            a.get("floors").ok_or_else(|| invalid("affiliate without floors"))?,
            "floors",
        )?);
    }
    let scores = matrix_from_json(v.get("scores").ok_or_else(|| invalid("missing scores"))?, "scores")?;
    RefugeeInstance::new(family_ids, q, affiliate_ids, floors, scores)
}

pub fn vector_to_json<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(Scalar::to_json).collect())
}

pub fn matrix_to_json<S: Scalar>(m: &[Vec<S>]) -> Value {
    Value::Array(m.iter().map(|r| vector_to_json(r)).collect())
}

fn support_to_json(points: &[SupportPoint]) -> Value {
    Value::Array(
        points
            .iter()
            .map(|p| match &p.coords {
                Some(c) => json!({"label": p.label, "coords": vector_to_json(c)}),
                None => json!({"label": p.label}),
            })
            .collect(),
    )
}

pub fn instance_to_json<S: Scalar>(inst: &Instance<S>) -> Value {
    let mut v = json!({
        "schema": SCHEMA,
        "d": inst.mu.dim(),
        "X": support_to_json(inst.mu.support()),
        "Y": support_to_json(inst.nu.support()),
        "mu": matrix_to_json(inst.mu.weights()),
        "nu": matrix_to_json(inst.nu.weights()),
        "eta": vector_to_json(&inst.eta.weights),
    });
    if let Some(c) = &inst.cost {
        v["cost"] = matrix_to_json(c.entries());
    }
    v
}

pub fn refugee_to_json<S: Scalar>(inst: &RefugeeInstance<S>) -> Value {
    json!({
        "schema": SCHEMA,
        "families": inst.family_ids.iter().zip(&inst.q)
            .map(|(id, q)| json!({"id": id, "q": vector_to_json(q)})).collect::<Vec<_>>(),
        "affiliates": inst.affiliate_ids.iter().zip(&inst.floors)
            .map(|(id, f)| json!({"id": id, "floors": vector_to_json(f)})).collect::<Vec<_>>(),
        "scores": matrix_to_json(&inst.scores),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};

    #[test]
    fn reads_mixed_number_formats() {
        let inst: Instance = parse_instance(
            r#"{"d": 2, "X": [{"label": "a", "coords": [0]}, {"label": "b", "coords": ["1/2"]}],
                "Y": [{"label": "p"}],
                "mu": [["1/2", 0.5], [0.25, "3/4"]], "nu": [[1], [1]],
                "cost": [[0], [0.1]]}"#,
        )
        .unwrap();
        assert_eq!(inst.mu.weights()[1], vec![rat(1, 4), rat(3, 4)]);
        assert_eq!(inst.cost().unwrap().get(1, 0), &rat(1, 10));
        assert_eq!(inst.eta.weights, vec![rat(3, 8), rat(5, 8)]);
        assert_eq!(inst.mu.support()[1].coords, Some(vec![rat(1, 2)]));
    }

    #[test]
    fn round_trips_exactly() {
        let text = r#"{"d": 1, "mu": [["1/3", "2/3"]], "nu": [["1/7", "6/7"]], "cost": [[0, 1], [2, 0]]}"#;
        let inst: Instance = parse_instance(text).unwrap();
        let again: Instance = instance_from_value(&instance_to_json(&inst)).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_instance::<Rational>("{").is_err());
        assert!(parse_instance::<Rational>(r#"{"d": 2, "mu": [[1]], "nu": [[1]]}"#).is_err());
        assert!(parse_instance::<Rational>(r#"{"mu": [["x"]], "nu": [[1]]}"#).is_err());
        assert!(parse_instance::<Rational>(r#"{"mu": [[1]], "nu": [[1]], "cost": [[-1]]}"#).is_err());
    }

    #[test]
    fn refugee_schema() {
        let inst: RefugeeInstance = parse_refugee(
            r#"{"families": [{"id": "f1", "q": [1, 2]}],
                "affiliates": [{"id": "a1", "floors": [0, 1]}],
                "scores": [[5]]}"#,
        )
        .unwrap();
        assert_eq!(inst.q, vec![vec![int(1), int(2)]]);
        let again: RefugeeInstance = parse_refugee(&refugee_to_json(&inst).to_string()).unwrap();
        assert_eq!(inst, again);
    }
}
