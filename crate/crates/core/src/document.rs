//! JSON documents for sets, functions and sublevel cores.
//!
//! Set: `{"dim": n, "repr": {"halfspaces": [{"normal": [..], "offset": b}, ..]}, "center": [..] | null}`,
//! with `"vertices": [[..], ..]` or `"sublevel": {"function": .., "level": A, "base": <set>}`
//! in place of `"halfspaces"`.
//! Function: `{"name": "<registry name>", "dim": n}` or `{"expr": "<expression>", "dim": n}`.
//! Core: `{"function": .., "domain": <set>, "x0": [..], "level": A}`.

use serde::{Deserialize, Serialize};

use crate::convex_geometry::{vector, ConvexSet, Halfspace, Representation, Vector};
use crate::error::{Error, Result};
use crate::function::ScalarFunction;
use crate::registry;
use crate::symmetrization::SublevelCore;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceDoc {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionDoc {
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Expr {
        expr: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SublevelDoc {
    pub function: FunctionDoc,
    pub level: f64,
    pub base: Box<SetDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReprDoc {
    Halfspaces(Vec<HalfspaceDoc>),
    Vertices(Vec<Vec<f64>>),
    Sublevel(SublevelDoc),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDoc {
    pub dim: usize,
    pub repr: ReprDoc,
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreDoc {
    pub function: FunctionDoc,
    pub domain: SetDoc,
    pub x0: Vec<f64>,
    pub level: f64,
}

fn doc_err(e: impl std::fmt::Display) -> Error {
    Error::Document(e.to_string())
}

pub fn function_doc(f: &ScalarFunction) -> Result<FunctionDoc> {
    if registry::entry(f.name()).is_some() {
        return Ok(FunctionDoc::Named {
            name: f.name().to_string(),
            dim: Some(f.dim()),
        });
    }
    match f.expr() {
        Some(e) => Ok(FunctionDoc::Expr {
            expr: e.to_string(),
            dim: Some(f.dim()),
        }),
        None => Err(Error::NotSerializable(format!("function '{}' has no expression or registry name", f.name()))),
    }
}

pub fn function_from_doc(doc: &FunctionDoc) -> Result<ScalarFunction> {
    match doc {
        FunctionDoc::Named { name, dim } => {
            if registry::entry(name).is_none() {
                return Err(Error::Document(format!("unknown function '{name}'")));
            }
            registry::resolve(name, *dim)
        }
        FunctionDoc::Expr { expr, dim } => registry::resolve(expr, *dim),
    }
}

pub fn set_doc(s: &ConvexSet) -> Result<SetDoc> {
    let repr = match s.repr() {
        Representation::Halfspaces(rows) => ReprDoc::Halfspaces(
            rows.iter()
                .map(|h| HalfspaceDoc {
                    normal: h.normal.as_slice().to_vec(),
                    offset: h.offset,
                })
                .collect(),
        ),
        Representation::Vertices(vs) => ReprDoc::Vertices(vs.iter().map(|v| v.as_slice().to_vec()).collect()),
        Representation::Sublevel { function, level, base } => ReprDoc::Sublevel(SublevelDoc {
            function: function_doc(function)?,
            level: *level,
            base: Box::new(set_doc(base)?),
        }),
        Representation::Oracle { label, .. } => {
            return Err(Error::NotSerializable(format!("oracle set '{label}'")));
        }
    };
    Ok(SetDoc {
        dim: s.dim(),
        repr,
        center: s.center().map(|c| c.as_slice().to_vec()),
    })
}

fn checked_vector(xs: &[f64], dim: usize, what: &str) -> Result<Vector> {
    if xs.len() != dim {
        return Err(Error::Document(format!("{what} has length {} (expected {dim})", xs.len())));
    }
    Ok(vector(xs))
}

pub fn set_from_doc(doc: &SetDoc) -> Result<ConvexSet> {
    let n = doc.dim;
    let s = match &doc.repr {
        ReprDoc::Halfspaces(rows) => {
            let rows = rows
                .iter()
                .map(|h| {
                    Ok(Halfspace {
                        normal: checked_vector(&h.normal, n, "halfspace normal")?,
                        offset: h.offset,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ConvexSet::halfspaces(n, rows)?
        }
        ReprDoc::Vertices(vs) => {
            let pts = vs.iter().map(|v| checked_vector(v, n, "vertex")).collect::<Result<Vec<_>>>()?;
            ConvexSet::vertices(pts)?
        }
        ReprDoc::Sublevel(sl) => {
            let base = set_from_doc(&sl.base)?;
            let f = function_from_doc(&sl.function)?;
            if f.dim() != n || base.dim() != n {
                return Err(Error::Document(format!("sublevel parts do not have dimension {n}")));
            }
            ConvexSet::sublevel(f, sl.level, base)?
        }
    };
    match &doc.center {
        Some(c) => s.with_center(checked_vector(c, n, "center")?),
        None => Ok(s),
    }
}

pub fn set_to_json(s: &ConvexSet) -> Result<serde_json::Value> {
    serde_json::to_value(set_doc(s)?).map_err(doc_err)
}

pub fn set_from_json(v: &serde_json::Value) -> Result<ConvexSet> {
    let doc: SetDoc = serde_json::from_value(v.clone()).map_err(doc_err)?;
    set_from_doc(&doc)
}

pub fn set_from_str(text: &str) -> Result<ConvexSet> {
    let doc: SetDoc = serde_json::from_str(text).map_err(doc_err)?;
    set_from_doc(&doc)
}

pub fn core_to_json(core: &SublevelCore) -> Result<serde_json::Value> {
    let doc = CoreDoc {
        function: function_doc(&core.source)?,
        domain: set_doc(&core.domain)?,
        x0: core.x0.as_slice().to_vec(),
        level: core.level,
    };
    serde_json::to_value(doc).map_err(doc_err)
}

pub fn core_from_json(v: &serde_json::Value) -> Result<SublevelCore> {
    let doc: CoreDoc = serde_json::from_value(v.clone()).map_err(doc_err)?;
    let f = function_from_doc(&doc.function)?;
    let domain = set_from_doc(&doc.domain)?;
    let x0 = checked_vector(&doc.x0, domain.dim(), "x0")?;
    SublevelCore::build(&f, &domain, &x0, Some(doc.level))
}

/// Parse a point written as a JSON array, e.g. `"[0.5, -1]"`.
pub fn point_from_str(text: &str) -> Result<Vector> {
    let xs: Vec<f64> = serde_json::from_str(text).map_err(doc_err)?;
    Ok(vector(&xs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn set_round_trip() {
        let doc = json!({
            "dim": 2,
            "repr": {"halfspaces": [
                {"normal": [1.0, 0.0], "offset": 1.0},
                {"normal": [-1.0, 0.0], "offset": 1.0},
                {"normal": [0.0, 1.0], "offset": 2.0},
                {"normal": [0.0, -1.0], "offset": 2.0}
            ]},
            "center": [0.0, 0.0]
        });
        let s = set_from_json(&doc).unwrap();
        assert!(s.contains(&vector(&[0.9, -1.9])));
        assert!(!s.contains(&vector(&[1.1, 0.0])));
        assert_eq!(set_to_json(&s).unwrap(), doc);
    }

    #[test]
    fn vertices_and_sublevel() {
        let v = json!({"dim": 1, "repr": {"vertices": [[-1.0], [1.0]]}, "center": null});
        let s = set_from_json(&v).unwrap();
        assert_eq!(set_to_json(&s).unwrap(), v);
        let sl = json!({
            "dim": 1,
            "repr": {"sublevel": {"function": {"name": "square", "dim": 1}, "level": 1.0, "base": v}},
            "center": [0.0]
        });
        let s = set_from_json(&sl).unwrap();
        assert!(s.contains(&vector(&[0.99])) && !s.contains(&vector(&[1.01])));
        assert_eq!(set_to_json(&s).unwrap(), sl);
    }

    #[test]
    fn core_round_trip() {
        let f = registry::build("square", None).unwrap();
        let dom = ConvexSet::interval(-1.0, 2.0).unwrap();
        let core = SublevelCore::build(&f, &dom, &vector(&[0.0]), Some(1.0)).unwrap();
        let j = core_to_json(&core).unwrap();
        let back = core_from_json(&j).unwrap();
        assert_eq!(core_to_json(&back).unwrap(), j);
        assert!(back.c_a.contains(&vector(&[-1.0])) && !back.c_a.contains(&vector(&[1.5])));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(set_from_json(&json!({"dim": 2, "repr": {"vertices": [[1.0]]}})).is_err());
        assert!(set_from_json(&json!({"dim": 1, "repr": {"ellipse": 1}})).is_err());
        assert!(point_from_str("[1, x]").is_err());
        let oracle = ConvexSet::oracle(1, 1.0, "ball", |x: &Vector| x.norm() <= 1.0).unwrap();
        assert!(matches!(set_to_json(&oracle), Err(Error::NotSerializable(_))));
    }
}
