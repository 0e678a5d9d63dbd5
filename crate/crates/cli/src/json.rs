//! JSON forms of metrics, subsets, trees, graphs and extraction results.

use metric_ramsey_core::graph::Graph;
use metric_ramsey_core::hst::{HstNode, HstTree};
use metric_ramsey_core::metric::{build_metric_with, Arith, EmbeddingReport, FiniteMetric, Validation, Witness};
use metric_ramsey_core::ramsey::{ExtractionResult, Stage};
use serde_json::{json, Map, Value};

use crate::CliError;

/// Exact decimal expansion of `x`. Every finite double is a dyadic
/// rational, so finitely many fractional digits suffice.
pub fn exact_decimal(x: f64) -> String {
    if x == 0.0 || x.fract() == 0.0 {
        return format!("{x:.0}");
    }
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    let (m, e) = if exp == 0 { (mant, -1074) } else { (mant | (1u64 << 52), exp - 1075) };
    let digits = (-(e + m.trailing_zeros() as i64)).max(0) as usize;
    format!("{x:.digits$}")
}

/// A distance as a JSON number, or as an exact decimal string.
pub fn number(x: f64, exact: bool) -> Value {
    if exact {
        Value::String(exact_decimal(x))
    } else if x.is_finite() {
        json!(x)
    } else {
        Value::String(if x > 0.0 { "inf".into() } else { "-inf".into() })
    }
}

/// Reads a number given either as a JSON number or as a decimal string.
pub fn read_number(v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| CliError::format("number out of range")),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) => s.trim().parse().map_err(|_| CliError::format(format!("`{s}` is not a number"))),
        _ => Err(CliError::format("expected a number")),
    }
}

pub fn metric_to_json(x: &FiniteMetric, exact: bool) -> Value {
    let d: Vec<Value> = (0..x.n()).map(|i| Value::Array(x.row(i).iter().map(|&v| number(v, exact)).collect())).collect();
    json!({ "n": x.n(), "labels": x.labels(), "d": d })
}

pub fn metric_from_json(v: &Value, arith: Arith) -> Result<FiniteMetric, CliError> {
    let rows = v.get("d").and_then(Value::as_array).ok_or_else(|| CliError::format("metric needs a `d` matrix"))?;
    let matrix = rows
        .iter()
        .map(|r| {
            r.as_array().ok_or_else(|| CliError::format("`d` rows must be arrays"))?.iter().map(read_number).collect()
        })
        .collect::<Result<Vec<Vec<f64>>, CliError>>()?;
    if let Some(n) = v.get("n").and_then(Value::as_u64) {
        if n as usize != matrix.len() {
            return Err(CliError::format(format!("`n` = {n} but `d` has {} rows", matrix.len())));
        }
    }
    let labels = match v.get("labels") {
        None | Some(Value::Null) => None,
        Some(l) => Some(serde_json::from_value::<Vec<String>>(l.clone()).map_err(|e| CliError::format(e.to_string()))?),
    };
    Ok(build_metric_with(&matrix, labels, Validation { triangle: true, arith })?)
}

pub fn subset_to_json(indices: &[usize]) -> Value {
    json!({ "indices": indices })
}

pub fn node_to_json(u: &HstNode, exact: bool) -> Value {
    match u {
        HstNode::Leaf(id) => json!({ "leaf": id }),
        HstNode::Internal { delta, children } => json!({
            "delta": number(*delta, exact),
            "children": children.iter().map(|c| node_to_json(c, exact)).collect::<Vec<_>>(),
        }),
    }
}

pub fn hst_to_json(t: &HstTree, exact: bool) -> Value {
    json!({ "k": number(t.k, exact), "exact": t.exact, "root": node_to_json(&t.root, exact) })
}

fn node_from_json(v: &Value) -> Result<HstNode, CliError> {
    if let Some(id) = v.get("leaf") {
        let id = id.as_u64().ok_or_else(|| CliError::format("leaf ids are nonnegative integers"))?;
        return Ok(HstNode::Leaf(id as usize));
    }
    let delta = read_number(v.get("delta").ok_or_else(|| CliError::format("node needs `delta` or `leaf`"))?)?;
    let children = v
        .get("children")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::format("internal node needs `children`"))?
        .iter()
        .map(node_from_json)
        .collect::<Result<_, _>>()?;
    Ok(HstNode::Internal { delta, children })
}

pub fn hst_from_json(v: &Value) -> Result<HstTree, CliError> {
    let k = read_number(v.get("k").ok_or_else(|| CliError::format("tree needs `k`"))?)?;
    let exact = v.get("exact").and_then(Value::as_bool).unwrap_or(false);
    let root = node_from_json(v.get("root").ok_or_else(|| CliError::format("tree needs `root`"))?)?;
    let t = HstTree { k, exact, root };
    t.validate()?;
    Ok(t)
}

pub fn graph_to_json(g: &Graph) -> Value {
    json!({ "n": g.n(), "edges": g.edges().iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>() })
}

pub fn graph_from_json(v: &Value) -> Result<Graph, CliError> {
    let n = v.get("n").and_then(Value::as_u64).ok_or_else(|| CliError::format("graph needs `n`"))? as usize;
    let edges: Vec<(usize, usize)> = serde_json::from_value(v.get("edges").cloned().unwrap_or(Value::Null))
        .map_err(|e| CliError::format(format!("graph edges: {e}")))?;
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a >= n || b >= n) {
        return Err(CliError::format(format!("edge ({a},{b}) outside 0..{n}")));
    }
    Ok(Graph::from_edges(n, &edges))
}

fn witness(w: &Option<Witness>, exact: bool) -> Value {
    match w {
        None => Value::Null,
        Some(w) => json!({ "pair": [w.pair.0, w.pair.1], "dx": number(w.dx, exact), "dy": number(w.dy, exact) }),
    }
}

pub fn report_to_json(r: &EmbeddingReport, exact: bool) -> Value {
    json!({
        "expansion": number(r.expansion, exact),
        "contraction": number(r.contraction, exact),
        "distortion": number(r.distortion, exact),
        "expansion_witness": witness(&r.expansion_witness, exact),
        "contraction_witness": witness(&r.contraction_witness, exact),
    })
}

pub fn stage_to_json(s: &Stage) -> Value {
    json!({ "op": s.op, "alpha": number(s.alpha, false), "size": s.size, "distortion": number(s.distortion, false), "psi": number(s.psi, false) })
}

/// `{"subset", "hst", "distortion", "psi", "trace"}` plus the two sides of
/// the weighted condition and the heuristic flag.
pub fn extraction_to_json(r: &ExtractionResult, exact: bool) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("subset".into(), json!(r.subset.indices()));
    m.insert("hst".into(), hst_to_json(&r.tree, exact));
    m.insert("distortion".into(), report_to_json(&r.report, exact));
    m.insert("psi".into(), number(r.psi, false));
    m.insert("weighted".into(), json!({ "lhs": number(r.weighted_lhs, false), "rhs": number(r.weighted_rhs, false) }));
    m.insert("heuristic".into(), json!(r.heuristic));
    m.insert("trace".into(), Value::Array(r.trace.iter().map(stage_to_json).collect()));
    m
}
