//! JSON documents for spaces, simplices and glue plans.
//!
//! A space is either `{"labels": [...], "matrix": [[...]]}` or
//! `{"graph": {"vertices": [...], "edges": [[u, v, length], ...]}}`. Numbers
//! may be JSON numbers or exact strings such as `"7/2"`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::combine::{Component, GluePlan, GlueStep};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::simplex::{Entry, WeightedSimplex};
use crate::space::{SemiMetricSpace, WeightedGraph};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    labels: Vec<String>,
    matrix: Vec<Vec<Scalar>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphBody {
    vertices: Vec<String>,
    edges: Vec<(String, String, Scalar)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    graph: GraphBody,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimplexDoc {
    a: Vec<(String, Scalar)>,
    b: Vec<(String, Scalar)>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    name: String,
    space: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanDoc {
    #[serde(default = "Scalar::one")]
    p: Scalar,
    components: Vec<ComponentDoc>,
    #[serde(default)]
    steps: Vec<(String, String, String, String)>,
}

fn parse_value(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("malformed JSON: {e}")))
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value, what: &str) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(format!("invalid {what} document: {e}")))
}

pub fn space_from_value(v: Value) -> Result<SemiMetricSpace> {
    if v.get("graph").is_some() {
        let doc: GraphDoc = from_value(v, "graph")?;
        let g = WeightedGraph::new(doc.graph.vertices, doc.graph.edges)?;
        SemiMetricSpace::from_graph(&g)
    } else {
        let doc: MatrixDoc = from_value(v, "space")?;
        SemiMetricSpace::from_matrix(doc.labels, doc.matrix, true)
    }
}

pub fn parse_space(text: &str) -> Result<SemiMetricSpace> {
    space_from_value(parse_value(text)?)
}

pub fn space_to_value(s: &SemiMetricSpace) -> Value {
    json!({ "labels": s.labels(), "matrix": s.matrix() })
}

pub fn parse_simplex(text: &str, space: &SemiMetricSpace) -> Result<WeightedSimplex> {
    let doc: SimplexDoc = from_value(parse_value(text)?, "simplex")?;
    WeightedSimplex::from_labels(space, &borrow(&doc.a), &borrow(&doc.b))
}

fn borrow(t: &[(String, Scalar)]) -> Vec<(&str, Scalar)> {
    t.iter().map(|(l, w)| (l.as_str(), w.clone())).collect()
}

pub fn simplex_to_value(d: &WeightedSimplex, space: &SemiMetricSpace) -> Value {
    let team = |t: &[Entry]| -> Vec<Value> { t.iter().map(|(i, w)| json!([space.label(*i), w])).collect() };
    json!({ "a": team(d.a_team()), "b": team(d.b_team()) })
}

pub fn parse_plan(text: &str) -> Result<GluePlan> {
    plan_from_value(parse_value(text)?)
}

pub fn plan_from_value(v: Value) -> Result<GluePlan> {
    let doc: PlanDoc = from_value(v, "plan")?;
    let components = doc
        .components
        .into_iter()
        .map(|c| {
            let space = space_from_value(c.space).map_err(|e| Error::Parse(format!("component '{}': {e}", c.name)))?;
            Ok(Component { name: c.name, space })
        })
        .collect::<Result<Vec<_>>>()?;
    let steps = doc
        .steps
        .into_iter()
        .map(|(left, left_label, right, right_label)| GlueStep { left, left_label, right, right_label })
        .collect();
    Ok(GluePlan { p: doc.p, components, steps })
}

pub fn plan_to_value(plan: &GluePlan) -> Value {
    json!({
        "p": plan.p,
        "components": plan
            .components
            .iter()
            .map(|c| json!({ "name": c.name, "space": space_to_value(&c.space) }))
            .collect::<Vec<_>>(),
        "steps": plan
            .steps
            .iter()
            .map(|s| json!([s.left, s.left_label, s.right, s.right_label]))
            .collect::<Vec<_>>(),
    })
}

/// A value printed both exactly and as a decimal.
#[derive(Clone, Debug, Serialize)]
pub struct Rendered {
    pub value: Scalar,
    pub decimal: f64,
}

impl From<&Scalar> for Rendered {
    fn from(s: &Scalar) -> Self {
        Rendered { value: s.clone(), decimal: s.to_f64() }
    }
}
