//! Quiver representation JSON and the bridge from weighted DAGs (thin
//! representations) to quadruples and iterated filtrations.

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use itlog_core::dag::{subgraph_lattice, Dag, Edge};
use itlog_core::rational::{fmt_q, from_f64, parse_q, to_f64};
use itlog_core::weight::iterated_weight_filtration;
use itlog_core::Q;

use crate::staralg::{Ambient, GradedProjectors, MElem, Mat, Quadruple};
use crate::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct QVertexDoc {
    pub id: String,
    pub dim: usize,
    pub mass: String,
    #[serde(default = "zero")]
    pub theta: String,
}

fn zero() -> String {
    "0".into()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ArrowDoc {
    pub src: String,
    pub dst: String,
    /// Rows of `(re, im)` decimal strings, `dim(dst) × dim(src)`.
    pub matrix: Vec<Vec<(String, String)>>,
}

/// `{"vertices":[{"id","dim","mass","theta"}], "arrows":[{"src","dst","matrix"}]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct QuiverDoc {
    pub vertices: Vec<QVertexDoc>,
    pub arrows: Vec<ArrowDoc>,
}

fn num(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().or_else(|_| parse_q(s).map(|q| to_f64(&q)).map_err(|_| Error::Parse(format!("not a number: {s:?}"))))
}

impl QuiverDoc {
    pub fn masses(&self) -> Result<Vec<Q>> {
        self.vertices.iter().map(|v| Ok(parse_q(&v.mass)?)).collect()
    }

    pub fn thetas(&self) -> Result<Vec<Q>> {
        self.vertices.iter().map(|v| Ok(parse_q(&v.theta)?)).collect()
    }

    pub fn to_quadruple(&self) -> Result<Quadruple> {
        let ids: Vec<String> = self.vertices.iter().map(|v| v.id.clone()).collect();
        let idx = |n: &str| ids.iter().position(|e| e == n).ok_or_else(|| Error::Parse(format!("unknown vertex {n:?}")));
        let arrows = self.arrows.iter().map(|a| Ok((idx(&a.src)?, idx(&a.dst)?))).collect::<Result<Vec<_>>>()?;
        let dims = self.vertices.iter().map(|v| v.dim).collect();
        let masses = self.masses()?.iter().map(to_f64).collect();
        let amb = Ambient::new(ids, dims, masses, arrows)?;
        let mut phi = amb.m_zero();
        for (k, a) in self.arrows.iter().enumerate() {
            let (r, c) = phi.0[k].shape();
            if a.matrix.len() != r || a.matrix.iter().any(|row| row.len() != c) {
                return Err(Error::ShapeMismatch(format!("arrow {}→{} needs a {r}×{c} matrix", a.src, a.dst)));
            }
            for (i, row) in a.matrix.iter().enumerate() {
                for (j, (re, im)) in row.iter().enumerate() {
                    phi.0[k][(i, j)] = Complex::new(num(re)?, num(im)?);
                }
            }
        }
        let theta: Vec<f64> = self.thetas()?.iter().map(to_f64).collect();
        Quadruple::from_quiver(amb, &theta, phi)
    }

    pub fn from_quadruple(q: &Quadruple, masses: &[Q], thetas: &[Q]) -> QuiverDoc {
        let amb = &q.amb;
        let vertices = (0..amb.n_blocks())
            .map(|i| QVertexDoc { id: amb.ids[i].clone(), dim: amb.dims[i], mass: fmt_q(&masses[i]), theta: fmt_q(&thetas[i]) })
            .collect();
        let arrows = amb
            .arrows
            .iter()
            .zip(&q.phi.0)
            .map(|(&(s, d), m)| ArrowDoc {
                src: amb.ids[s].clone(),
                dst: amb.ids[d].clone(),
                matrix: (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| (format!("{:.17e}", m[(i, j)].re), format!("{:.17e}", m[(i, j)].im))).collect())
                    .collect(),
            })
            .collect();
        QuiverDoc { vertices, arrows }
    }

    /// The weighted DAG of a thin representation with θ = 0 (c_α = |φ_α|²).
    pub fn to_dag(&self) -> Result<Dag> {
        if self.vertices.iter().any(|v| v.dim != 1) {
            return Err(Error::Invalid("not a thin representation; supply the filtration externally".into()));
        }
        if self.thetas()?.iter().any(|t| *t != Q::from_integer(0.into())) {
            return Err(Error::Invalid("θ ≠ 0 requires an externally supplied filtration".into()));
        }
        let q = self.to_quadruple()?;
        let edges = q
            .amb
            .arrows
            .iter()
            .zip(&q.phi.0)
            .map(|(&(src, dst), m)| Edge { src, dst, c: from_f64(m[(0, 0)].norm_sqr()) })
            .collect();
        Ok(Dag::new(q.amb.ids.clone(), self.masses()?, edges)?)
    }
}

/// Thin representation of a weighted DAG: φ_α = √c_α, θ = 0.
pub fn thin_quadruple(g: &Dag) -> Result<Quadruple> {
    let amb = Ambient::thin(g.ids.clone(), g.masses.iter().map(to_f64).collect(), g.edges.iter().map(|e| (e.src, e.dst)).collect())?;
    let phi = MElem(g.edges.iter().map(|e| Mat::from_element(1, 1, Complex::new(to_f64(&e.c).sqrt(), 0.0))).collect());
    Quadruple::from_quiver(amb, &vec![0.0; g.n()], phi)
}

/// Per-vertex label sequences of the iterated weight filtration and the
/// corresponding graded projectors, one per level.
#[derive(Clone, Debug)]
pub struct ThinFiltration {
    pub labels: Vec<Vec<Q>>,
    pub gradings: Vec<GradedProjectors>,
}

impl ThinFiltration {
    pub fn depth(&self) -> usize {
        self.gradings.len()
    }

    /// Vertices grouped by their level-`level` label (0-based), with mass weights.
    pub fn level_groups(&self, level: usize, masses: &[f64]) -> Vec<(Q, Vec<(usize, f64)>)> {
        let mut out: Vec<(Q, Vec<(usize, f64)>)> = Vec::new();
        for (v, ls) in self.labels.iter().enumerate() {
            let l = &ls[level];
            match out.iter_mut().find(|(k, _)| k == l) {
                Some((_, m)) => m.push((v, masses[v])),
                None => out.push((l.clone(), vec![(v, masses[v])])),
            }
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

pub fn thin_filtration(g: &Dag) -> Result<ThinFiltration> {
    let wl = subgraph_lattice(g)?;
    let it = iterated_weight_filtration(&wl)?;
    let by_vertex = it
        .labels_by_vertex(&wl.lattice)
        .ok_or_else(|| Error::Invalid("subgraph lattice lost its vertex sets".into()))?;
    let mut labels = vec![Vec::new(); g.n()];
    for (v, ls) in by_vertex {
        labels[v] = ls;
    }
    if labels.iter().any(|l| l.len() != it.depth) {
        return Err(Error::Invalid("every vertex needs one label per level".into()));
    }
    let gradings = (0..it.depth)
        .map(|k| GradedProjectors::thin(&labels.iter().map(|l| l[k].clone()).collect::<Vec<_>>()))
        .collect();
    Ok(ThinFiltration { labels, gradings })
}
