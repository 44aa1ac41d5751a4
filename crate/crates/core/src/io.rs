//! JSON documents for lattices, additive functionals, polarizations and DAGs.
//!
//! Rationals are strings `"p"`, `"p/q"` or decimals; unknown fields are rejected.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dag::{Dag, Edge};
use crate::lattice::{interval_classes, FinLattice};
use crate::rational::{fmt_q, parse_q, Gauss, Q};
use crate::{Error, Result};

/// `{"elements": [...], "leq": [[a, b], ...]}`; covers suffice.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct LatticeDoc {
    pub elements: Vec<String>,
    pub leq: Vec<(String, String)>,
}

/// `{"class_weights": {"0": "3/2", ...}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct XDoc {
    pub class_weights: BTreeMap<String, String>,
}

/// `{"class_z": {"0": ["1", "1"], ...}}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct PolarizationDoc {
    pub class_z: BTreeMap<String, (String, String)>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct VertexDoc {
    pub id: String,
    pub mass: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub src: String,
    pub dst: String,
    #[serde(default = "one")]
    pub c: String,
}

fn one() -> String {
    "1".into()
}

/// `{"vertices": [{"id", "mass"}], "edges": [{"src", "dst", "c"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DagDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

pub fn from_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

impl LatticeDoc {
    pub fn to_lattice(&self) -> Result<FinLattice> {
        let idx = |n: &str| {
            self.elements
                .iter()
                .position(|e| e == n)
                .ok_or_else(|| Error::Parse(format!("unknown element {n:?}")))
        };
        let pairs = self
            .leq
            .iter()
            .map(|(a, b)| Ok((idx(a)?, idx(b)?)))
            .collect::<Result<Vec<_>>>()?;
        FinLattice::build(self.elements.clone(), &pairs)
    }

    /// Cover relations of `l`.
    pub fn from_lattice(l: &FinLattice) -> LatticeDoc {
        let leq = (0..l.len())
            .flat_map(|a| l.upper_covers(a).iter().map(move |&b| (a, b)))
            .map(|(a, b)| (l.name(a).to_string(), l.name(b).to_string()))
            .collect();
        LatticeDoc { elements: l.names().to_vec(), leq }
    }
}

fn class_keys<V>(m: &BTreeMap<String, V>, n: usize) -> Result<Vec<&V>> {
    (0..n)
        .map(|k| m.get(&k.to_string()).ok_or_else(|| Error::Parse(format!("missing class {k}"))))
        .collect::<Result<Vec<_>>>()
        .and_then(|v| {
            if m.len() == n {
                Ok(v)
            } else {
                Err(Error::Parse(format!("expected {n} classes, got {}", m.len())))
            }
        })
}

impl XDoc {
    /// Weights indexed by the interval classes of `l`.
    pub fn weights(&self, l: &FinLattice) -> Result<Vec<Q>> {
        let n = interval_classes(l).len();
        class_keys(&self.class_weights, n)?.into_iter().map(|s| parse_q(s)).collect()
    }

    pub fn from_weights(w: &[Q]) -> XDoc {
        XDoc { class_weights: w.iter().enumerate().map(|(k, x)| (k.to_string(), fmt_q(x))).collect() }
    }
}

impl PolarizationDoc {
    pub fn values(&self, l: &FinLattice) -> Result<Vec<Gauss>> {
        let n = interval_classes(l).len();
        class_keys(&self.class_z, n)?
            .into_iter()
            .map(|(re, im)| Ok(Gauss::new(parse_q(re)?, parse_q(im)?)))
            .collect()
    }
}

impl DagDoc {
    pub fn to_dag(&self) -> Result<Dag> {
        let ids: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let masses = self.vertices.iter().map(|v| parse_q(&v.mass)).collect::<Result<Vec<_>>>()?;
        let idx = |n: &str| {
            ids.iter()
                .position(|e| e == n)
                .ok_or_else(|| Error::Parse(format!("unknown vertex {n:?}")))
        };
        let edges = self
            .edges
            .iter()
            .map(|e| Ok(Edge { src: idx(&e.src)?, dst: idx(&e.dst)?, c: parse_q(&e.c)? }))
            .collect::<Result<Vec<_>>>()?;
        Dag::new(ids, masses, edges)
    }

    pub fn from_dag(g: &Dag) -> DagDoc {
        DagDoc {
            vertices: g
                .ids
                .iter()
                .zip(&g.masses)
                .map(|(id, m)| VertexDoc { id: id.clone(), mass: fmt_q(m) })
                .collect(),
            edges: g
                .edges
                .iter()
                .map(|e| EdgeDoc { src: g.ids[e.src].clone(), dst: g.ids[e.dst].clone(), c: fmt_q(&e.c) })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_round_trip() {
        let doc: LatticeDoc =
            from_json(r#"{"elements":["0","a","b","1"],"leq":[["0","a"],["0","b"],["a","1"],["b","1"]]}"#).unwrap();
        let l = doc.to_lattice().unwrap();
        assert_eq!(l.len(), 4);
        let again = LatticeDoc::from_lattice(&l).to_lattice().unwrap();
        assert_eq!(again.len(), 4);
        let x: XDoc = from_json(r#"{"class_weights":{"0":"1","1":"3/2"}}"#).unwrap();
        assert_eq!(x.weights(&l).unwrap().len(), 2);
        assert!(from_json::<XDoc>(r#"{"class_weights":{},"extra":1}"#).is_err());
    }

    #[test]
    fn dag_round_trip() {
        let doc: DagDoc =
            from_json(r#"{"vertices":[{"id":"a","mass":"2"},{"id":"b","mass":"1"}],"edges":[{"src":"a","dst":"b","c":"1"}]}"#)
                .unwrap();
        let g = doc.to_dag().unwrap();
        assert_eq!(DagDoc::from_dag(&g), doc);
    }
}
