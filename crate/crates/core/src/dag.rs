//! Weight gradings of directed acyclic graphs.
//!
//! The weight grading minimizes `Σ mᵢvᵢ²` subject to `vᵢ − v_j ≥ 1` on every
//! edge `i → j`. It is computed by an exact primal active-set method whose
//! working set is always a forest, so each equality-constrained subproblem is
//! solved by a tree traversal. Certificates come from an exact simplex.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use num::{Signed, Zero};
use petgraph::algo::toposort;
use petgraph::graph::DiGraph;

use crate::lattice::{FinLattice, WeightedLattice};
use crate::lp::{max_flow, simplex_max, LpResult};
use crate::rational::{q, to_f64, Q};
use crate::{Error, Result};

/// An edge `src → dst` with flow constant `c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub c: Q,
}

/// A finite DAG with positive vertex masses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    pub ids: Vec<String>,
    pub masses: Vec<Q>,
    pub edges: Vec<Edge>,
}

/// Lagrange multipliers `u_α ≥ 0`, one per edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub u: Vec<Q>,
}

impl Dag {
    /// Validate and build.
    pub fn new(ids: Vec<String>, masses: Vec<Q>, edges: Vec<Edge>) -> Result<Dag> {
        let n = ids.len();
        if masses.len() != n {
            return Err(Error::InvalidGraph("one mass per vertex required".into()));
        }
        if masses.iter().any(|m| !m.is_positive()) {
            return Err(Error::InvalidGraph("masses must be positive".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::InvalidGraph("edge endpoint out of range".into()));
            }
            if e.src == e.dst {
                return Err(Error::InvalidGraph(format!("self-loop at {}", ids[e.src])));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(Error::InvalidGraph(format!("multiple edges {} -> {}", ids[e.src], ids[e.dst])));
            }
            if !e.c.is_positive() {
                return Err(Error::InvalidGraph("flow constants must be positive".into()));
            }
        }
        let g = Dag { ids, masses, edges };
        g.topological_order()?;
        Ok(g)
    }

    /// Unit masses and unit flow constants on `0..n`.
    pub fn unit(n: usize, edges: &[(usize, usize)]) -> Result<Dag> {
        let ids = (0..n).map(|i| (i + 1).to_string()).collect();
        Self::with_masses((0..n).map(|_| q(1)).collect(), edges).map(|g| Dag { ids, ..g })
    }

    /// Given masses, unit flow constants, vertices named `1..=n`.
    pub fn with_masses(masses: Vec<Q>, edges: &[(usize, usize)]) -> Result<Dag> {
        let ids = (0..masses.len()).map(|i| (i + 1).to_string()).collect();
        let edges = edges.iter().map(|&(src, dst)| Edge { src, dst, c: q(1) }).collect();
        Dag::new(ids, masses, edges)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    /// Vertices with sources before targets.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::new();
        let nodes: Vec<_> = (0..self.n()).map(|_| g.add_node(())).collect();
        for e in &self.edges {
            g.add_edge(nodes[e.src], nodes[e.dst], ());
        }
        toposort(&g, None)
            .map(|o| o.into_iter().map(|x| x.index()).collect())
            .map_err(|c| Error::InvalidGraph(format!("directed cycle through {}", self.ids[c.node_id().index()])))
    }

    /// Path `1 → 2 → … → n`.
    pub fn path(masses: Vec<Q>) -> Dag {
        let edges: Vec<(usize, usize)> = (1..masses.len()).map(|i| (i - 1, i)).collect();
        Self::with_masses(masses, &edges).expect("paths are DAGs")
    }

    /// Zig-zag `1 → 2 ← 3 → 4`.
    pub fn a4(masses: [Q; 4]) -> Dag {
        Self::with_masses(masses.to_vec(), &[(0, 1), (2, 1), (2, 3)]).expect("A4 is a DAG")
    }

    /// Successor bitmasks over the given edges.
    pub fn succ_masks(&self, edges: impl Iterator<Item = usize>) -> Vec<u64> {
        let mut s = vec![0u64; self.n()];
        for k in edges {
            let e = &self.edges[k];
            s[e.src] |= 1 << e.dst;
        }
        s
    }
}

/// All subsets closed under the given successor relation, via recursive
/// extension along a reverse topological order.
pub fn closed_subsets(order: &[usize], succ: &[u64], cap: usize) -> Result<Vec<u64>> {
    fn rec(order: &[usize], succ: &[u64], k: usize, cur: u64, out: &mut Vec<u64>, cap: usize) -> Result<()> {
        if k == order.len() {
            if out.len() >= cap {
                return Err(Error::TooLarge(format!("more than {cap} closed subsets")));
            }
            out.push(cur);
            return Ok(());
        }
        let i = order[k];
        rec(order, succ, k + 1, cur, out, cap)?;
        if succ[i] & !cur == 0 {
            rec(order, succ, k + 1, cur | 1 << i, out, cap)?;
        }
        Ok(())
    }
    let rev: Vec<usize> = order.iter().rev().copied().collect();
    let mut out = Vec::new();
    rec(&rev, succ, 0, 0, &mut out, cap)?;
    Ok(out)
}

fn longest_path_to_sink(g: &Dag) -> Vec<Q> {
    let order = g.topological_order().expect("validated DAG");
    let mut h = vec![0i64; g.n()];
    for &i in order.iter().rev() {
        for e in g.edges.iter().filter(|e| e.src == i) {
            h[i] = h[i].max(h[e.dst] + 1);
        }
    }
    h.into_iter().map(q).collect()
}

/// Undirected adjacency of the working set: `(neighbor, edge, sign)` where
/// `sign = +1` if the vertex is the edge source.
fn forest_adjacency(g: &Dag, work: &[bool]) -> Vec<Vec<(usize, usize, i64)>> {
    let mut adj = vec![Vec::new(); g.n()];
    for (k, e) in g.edges.iter().enumerate() {
        if work[k] {
            adj[e.src].push((e.dst, k, 1));
            adj[e.dst].push((e.src, k, -1));
        }
    }
    adj
}

/// BFS components of the working forest: for each component, the visit order
/// and the parent `(vertex, edge)` of each vertex.
#[allow(clippy::type_complexity)]
fn forest_components(g: &Dag, work: &[bool]) -> (Vec<Vec<usize>>, Vec<Option<(usize, usize)>>) {
    let adj = forest_adjacency(g, work);
    let mut parent = vec![None; g.n()];
    let mut seen = vec![false; g.n()];
    let mut comps = Vec::new();
    for root in 0..g.n() {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut comp = vec![root];
        let mut queue = VecDeque::from([root]);
        while let Some(x) = queue.pop_front() {
            for &(y, k, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    parent[y] = Some((x, k));
                    comp.push(y);
                    queue.push_back(y);
                }
            }
        }
        comps.push(comp);
    }
    (comps, parent)
}

/// Minimizer of `Σ m v²` with the working-set edges held at gap exactly 1.
fn eqp(g: &Dag, work: &[bool]) -> Vec<Q> {
    let (comps, parent) = forest_components(g, work);
    let mut v = vec![Q::zero(); g.n()];
    for comp in comps {
        let mut d = vec![Q::zero(); comp.len()];
        let pos: std::collections::HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        for (idx, &x) in comp.iter().enumerate().skip(1) {
            let (p, k) = parent[x].expect("non-root has a parent");
            let e = &g.edges[k];
            // v_src − v_dst = 1.
            d[idx] = if e.src == p { &d[pos[&p]] - q(1) } else { &d[pos[&p]] + q(1) };
        }
        let (num, den) = comp
            .iter()
            .zip(&d)
            .fold((Q::zero(), Q::zero()), |(a, b), (&x, dx)| (a + &g.masses[x] * dx, b + &g.masses[x]));
        let c = -(num / den);
        for (&x, dx) in comp.iter().zip(&d) {
            v[x] = dx + &c;
        }
    }
    v
}

/// KKT multipliers of the working-set edges at a working-set optimum.
fn forest_multipliers(g: &Dag, work: &[bool], v: &[Q]) -> Vec<Q> {
    let (comps, parent) = forest_components(g, work);
    let mut u = vec![Q::zero(); g.edges.len()];
    let mut sub: Vec<Q> = (0..g.n()).map(|i| &g.masses[i] * &v[i]).collect();
    for comp in comps {
        for &x in comp.iter().skip(1).rev() {
            let (p, k) = parent[x].expect("non-root has a parent");
            let sx = sub[x].clone();
            // Net outflow of the subtree through its parent edge.
            u[k] = if g.edges[k].src == x { sx.clone() } else { -sx.clone() };
            sub[p] = &sub[p] + sx;
        }
    }
    u
}

/// The weight grading and a certificate of optimality.
pub fn weight_grading(g: &Dag) -> (Vec<Q>, Certificate) {
    let m = g.edges.len();
    let mut v = longest_path_to_sink(g);
    let mut work = vec![false; m];
    let mut iters = 0usize;
    loop {
        iters += 1;
        assert!(iters < 100_000, "active-set iteration cap reached");
        let target = eqp(g, &work);
        let p: Vec<Q> = target.iter().zip(&v).map(|(a, b)| a - b).collect();
        if p.iter().any(|x| !x.is_zero()) {
            let mut alpha = q(1);
            let mut block = None;
            for (k, e) in g.edges.iter().enumerate() {
                if work[k] {
                    continue;
                }
                let dp = &p[e.src] - &p[e.dst];
                if dp.is_negative() {
                    let gap = &v[e.src] - &v[e.dst] - q(1);
                    let a = gap / -dp;
                    if a < alpha {
                        alpha = a;
                        block = Some(k);
                    }
                }
            }
            for (vi, pi) in v.iter_mut().zip(&p) {
                *vi = &*vi + &alpha * pi;
            }
            if let Some(k) = block {
                work[k] = true;
            }
            continue;
        }
        let u = forest_multipliers(g, &work, &v);
        match (0..m).find(|&k| work[k] && u[k].is_negative()) {
            Some(k) => work[k] = false,
            None => break,
        }
    }
    let cert = certificate_lp(g, &v).expect("an optimal grading has a certificate");
    (v, cert)
}

/// Edges with `vᵢ − v_j = 1`.
pub fn tight_edges(g: &Dag, v: &[Q]) -> Vec<usize> {
    g.edges
        .iter()
        .enumerate()
        .filter(|(_, e)| &v[e.src] - &v[e.dst] == q(1))
        .map(|(k, _)| k)
        .collect()
}

/// Whether every edge gap is at least one.
pub fn is_grading(g: &Dag, v: &[Q]) -> bool {
    v.len() == g.n() && g.edges.iter().all(|e| &v[e.src] - &v[e.dst] >= q(1))
}

/// Whether `u` certifies `v`: nonnegative, supported on tight edges, balanced.
pub fn is_certificate(g: &Dag, v: &[Q], u: &Certificate) -> bool {
    if u.u.len() != g.edges.len() || u.u.iter().any(|x| x.is_negative()) {
        return false;
    }
    let tight = tight_edges(g, v);
    if (0..g.edges.len()).any(|k| !tight.contains(&k) && !u.u[k].is_zero()) {
        return false;
    }
    let mut bal: Vec<Q> = (0..g.n()).map(|i| &g.masses[i] * &v[i]).collect();
    for (e, uk) in g.edges.iter().zip(&u.u) {
        bal[e.src] = &bal[e.src] - uk;
        bal[e.dst] = &bal[e.dst] + uk;
    }
    bal.iter().all(Zero::is_zero)
}

fn balance_rows(g: &Dag, tight: &[usize], extra: usize) -> Vec<Vec<Q>> {
    (0..g.n())
        .map(|i| {
            let mut row = vec![Q::zero(); tight.len() + extra];
            for (col, &k) in tight.iter().enumerate() {
                let e = &g.edges[k];
                if e.src == i {
                    row[col] = q(1);
                } else if e.dst == i {
                    row[col] = q(-1);
                }
            }
            row
        })
        .collect()
}

/// A basic feasible certificate from the simplex (Bland's rule), if any.
pub fn certificate_lp(g: &Dag, v: &[Q]) -> Option<Certificate> {
    let tight = tight_edges(g, v);
    let a = balance_rows(g, &tight, 0);
    let b: Vec<Q> = (0..g.n()).map(|i| &g.masses[i] * &v[i]).collect();
    match simplex_max(&a, &b, &vec![Q::zero(); tight.len()]) {
        LpResult::Optimal { x, .. } => {
            let mut u = vec![Q::zero(); g.edges.len()];
            for (col, &k) in tight.iter().enumerate() {
                u[k] = x[col].clone();
            }
            Some(Certificate { u })
        }
        _ => None,
    }
}

/// A certificate with `u > 0` on every tight edge, if one exists.
///
/// Maximizes `s` subject to `u_e − s − w_e = 0`, `w, s ≥ 0` and balance.
pub fn strict_multipliers_exist(g: &Dag, v: &[Q]) -> Option<Certificate> {
    let tight = tight_edges(g, v);
    let t = tight.len();
    // Columns: u (t), s (1), w (t).
    let mut a = balance_rows(g, &tight, 1 + t);
    let mut b: Vec<Q> = (0..g.n()).map(|i| &g.masses[i] * &v[i]).collect();
    for col in 0..t {
        let mut row = vec![Q::zero(); 2 * t + 1];
        row[col] = q(1);
        row[t] = q(-1);
        row[t + 1 + col] = q(-1);
        a.push(row);
        b.push(Q::zero());
    }
    let mut c = vec![Q::zero(); 2 * t + 1];
    c[t] = q(1);
    match simplex_max(&a, &b, &c) {
        LpResult::Optimal { x, value } if value.is_positive() || t == 0 => {
            let mut u = vec![Q::zero(); g.edges.len()];
            for (col, &k) in tight.iter().enumerate() {
                u[k] = x[col].clone();
            }
            Some(Certificate { u })
        }
        _ => None,
    }
}

/// How [`verify_grading_with`] checks the closed-subset inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureCheck {
    Enumerate,
    MinCut,
    Auto,
}

/// Whether `v` is the weight grading (closed-subset characterization).
pub fn verify_grading(g: &Dag, v: &[Q]) -> bool {
    verify_grading_with(g, v, ClosureCheck::Auto)
}

pub fn verify_grading_with(g: &Dag, v: &[Q], how: ClosureCheck) -> bool {
    if !is_grading(g, v) {
        return false;
    }
    let w: Vec<Q> = (0..g.n()).map(|i| &g.masses[i] * &v[i]).collect();
    if !w.iter().fold(Q::zero(), |a, b| a + b).is_zero() {
        return false;
    }
    let tight = tight_edges(g, v);
    let use_cut = match how {
        ClosureCheck::Enumerate => false,
        ClosureCheck::MinCut => true,
        ClosureCheck::Auto => g.n() > 20,
    };
    if use_cut {
        return max_closure_weight(g, &tight, &w) <= Q::zero();
    }
    let succ = g.succ_masks(tight.iter().copied());
    let order = g.topological_order().expect("validated DAG");
    let sets = closed_subsets(&order, &succ, usize::MAX).expect("no cap");
    sets.into_iter().all(|s| {
        (0..g.n()).filter(|i| s >> i & 1 == 1).fold(Q::zero(), |a, i| a + &w[i]) <= Q::zero()
    })
}

/// Maximum of `Σ_{i∈E} wᵢ` over sets closed under the given edges, by min cut.
fn max_closure_weight(g: &Dag, edges: &[usize], w: &[Q]) -> Q {
    let n = g.n();
    let (s, t) = (n, n + 1);
    let mut cap = vec![vec![Some(Q::zero()); n + 2]; n + 2];
    let mut positive = Q::zero();
    for (i, wi) in w.iter().enumerate() {
        if wi.is_positive() {
            cap[s][i] = Some(wi.clone());
            positive += wi;
        } else if wi.is_negative() {
            cap[i][t] = Some(-wi);
        }
    }
    for &k in edges {
        let e = &g.edges[k];
        cap[e.src][e.dst] = None;
    }
    let (flow, _) = max_flow(&cap, s, t);
    positive - flow
}

/// Energy `S(x) = Σ c_α e^{x_j − x_i}`.
pub fn dag_energy(g: &Dag, x: &[f64]) -> f64 {
    g.edges.iter().map(|e| to_f64(&e.c) * (x[e.dst] - x[e.src]).exp()).sum()
}

/// Right-hand side of `mᵢẋᵢ = Σ_{i→j} c e^{x_j−x_i} − Σ_{k→i} c e^{x_i−x_k}`.
pub fn dag_flow_rhs(g: &Dag, x: &[f64]) -> Vec<f64> {
    let expo: Vec<f64> = g.edges.iter().map(|e| x[e.dst] - x[e.src] + to_f64(&e.c).ln()).collect();
    let shift = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = vec![0.0; g.n()];
    if g.edges.is_empty() {
        return acc;
    }
    for (e, a) in g.edges.iter().zip(&expo) {
        let f = (a - shift).exp();
        acc[e.src] += f;
        acc[e.dst] -= f;
    }
    acc.iter().zip(&g.masses).map(|(a, m)| a * shift.exp() / to_f64(m)).collect()
}

/// Edge form: `y_α = −(x_j − x_i + log c_α)` evolves by a Lotka-Volterra system.
pub fn dag_flow_edge_rhs(g: &Dag, y: &[f64]) -> Vec<f64> {
    let mut xdot = vec![0.0; g.n()];
    for (e, ye) in g.edges.iter().zip(y) {
        let f = (-ye).exp();
        xdot[e.src] += f;
        xdot[e.dst] -= f;
    }
    for (xd, m) in xdot.iter_mut().zip(&g.masses) {
        *xd /= to_f64(m);
    }
    g.edges.iter().map(|e| xdot[e.src] - xdot[e.dst]).collect()
}

/// Edge variables of a vertex state.
pub fn edge_variables(g: &Dag, x: &[f64]) -> Vec<f64> {
    g.edges.iter().map(|e| -(x[e.dst] - x[e.src] + to_f64(&e.c).ln())).collect()
}

/// Residual of `mᵢvᵢ = Σ_{tight out} c e^{b_j−b_i} − Σ_{tight in} c e^{b_i−b_k}`.
pub fn ansatz_residual(g: &Dag, v: &[Q], b: &[f64]) -> Vec<f64> {
    let tight = tight_edges(g, v);
    let mut r: Vec<f64> = (0..g.n()).map(|i| to_f64(&g.masses[i]) * to_f64(&v[i])).collect();
    for &k in &tight {
        let e = &g.edges[k];
        let f = to_f64(&e.c) * (b[e.dst] - b[e.src]).exp();
        r[e.src] -= f;
        r[e.dst] += f;
    }
    r
}

/// Offsets `b` of the ansatz `xᵢ = vᵢ log t + bᵢ`: the minimum-norm critical
/// point of `S̃(x) = Σ_tight c e^{x_j−x_i} + Σ mᵢvᵢxᵢ`, found by damped Newton.
pub fn ansatz_offsets(g: &Dag, v: &[Q], u: &Certificate) -> Result<Vec<f64>> {
    let tight = tight_edges(g, v);
    if !is_certificate(g, v, u) || tight.iter().any(|&k| !u.u[k].is_positive()) {
        return Err(Error::NoStrictCertificate);
    }
    let n = g.n();
    let mut work = vec![false; g.edges.len()];
    for &k in &tight {
        work[k] = true;
    }
    let (comps, _) = forest_components(g, &work);
    // Gauge: the first vertex of each component is pinned to zero.
    let roots: Vec<usize> = comps.iter().map(|c| c[0]).collect();
    let free: Vec<usize> = (0..n).filter(|i| !roots.contains(i)).collect();
    let mv: Vec<f64> = (0..n).map(|i| to_f64(&g.masses[i]) * to_f64(&v[i])).collect();
    let stilde = |x: &[f64]| -> f64 {
        tight
            .iter()
            .map(|&k| {
                let e = &g.edges[k];
                to_f64(&e.c) * (x[e.dst] - x[e.src]).exp()
            })
            .sum::<f64>()
            + x.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>()
    };
    let mut x = vec![0.0; n];
    for _ in 0..200 {
        let grad: Vec<f64> = ansatz_residual(g, v, &x);
        let gnorm = free.iter().map(|&i| grad[i].abs()).fold(0.0, f64::max);
        if gnorm < 1e-13 {
            break;
        }
        let pos: std::collections::HashMap<usize, usize> = free.iter().enumerate().map(|(a, &i)| (i, a)).collect();
        let f = free.len();
        let mut h = DMatrix::<f64>::zeros(f, f);
        for &k in &tight {
            let e = &g.edges[k];
            let w = to_f64(&e.c) * (x[e.dst] - x[e.src]).exp();
            for (a, sa) in [(e.src, 1.0), (e.dst, -1.0)] {
                for (b, sb) in [(e.src, 1.0), (e.dst, -1.0)] {
                    if let (Some(&pa), Some(&pb)) = (pos.get(&a), pos.get(&b)) {
                        h[(pa, pb)] += sa * sb * w;
                    }
                }
            }
        }
        let rhs = DVector::from_iterator(f, free.iter().map(|&i| -grad[i]));
        let step = h.lu().solve(&rhs).ok_or(Error::NoStrictCertificate)?;
        let s0 = stilde(&x);
        let mut t = 1.0;
        loop {
            let mut trial = x.clone();
            for (a, &i) in free.iter().enumerate() {
                trial[i] += t * step[a];
            }
            if stilde(&trial) <= s0 || t < 1e-12 {
                x = trial;
                break;
            }
            t *= 0.5;
        }
    }
    for comp in &comps {
        let mean = comp.iter().map(|&i| x[i]).sum::<f64>() / comp.len() as f64;
        for &i in comp {
            x[i] -= mean;
        }
    }
    Ok(x)
}

/// Lattice of closed vertex subsets (no arrows leading out), with `X` the
/// total mass.
pub fn subgraph_lattice(g: &Dag) -> Result<WeightedLattice> {
    subgraph_lattice_capped(g, 100_000)
}

pub fn subgraph_lattice_capped(g: &Dag, cap: usize) -> Result<WeightedLattice> {
    let order = g.topological_order()?;
    let succ = g.succ_masks(0..g.edges.len());
    let mut masks = closed_subsets(&order, &succ, cap)?;
    masks.sort_by_key(|m| (m.count_ones(), *m));
    let names = masks
        .iter()
        .map(|&m| {
            let ids: Vec<&str> = (0..g.n()).filter(|i| m >> i & 1 == 1).map(|i| g.ids[i].as_str()).collect();
            format!("{{{}}}", ids.join(","))
        })
        .collect();
    let x = masks
        .iter()
        .map(|&m| (0..g.n()).filter(|i| m >> i & 1 == 1).fold(Q::zero(), |s, i| s + &g.masses[i]))
        .collect();
    let lattice = FinLattice::from_sets(names, masks)?;
    Ok(WeightedLattice { lattice, x })
}

/// The graphs `G⁽ⁿ⁾`: a point, then `G⁽ⁿ⁺¹⁾ = G⁽ⁿ⁾ × {0,1}` with arrows
/// `(i,0)→(i,1)` and `(i,0)→(j,1)` for every arrow `i→j`.
pub fn iterated_example_graph(n: usize) -> Dag {
    let mut names = vec![String::new()];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for _ in 0..n {
        let k = names.len();
        let mut next: Vec<String> = names.iter().map(|s| format!("{s}0")).collect();
        next.extend(names.iter().map(|s| format!("{s}1")));
        let mut ne: Vec<(usize, usize)> = (0..k).map(|i| (i, k + i)).collect();
        ne.extend(edges.iter().map(|&(i, j)| (i, k + j)));
        names = next;
        edges = ne;
    }
    let ids = names.into_iter().map(|s| format!("v{s}")).collect();
    let n = edges.iter().map(|e| e.0.max(e.1) + 1).max().unwrap_or(1);
    let edges = edges.into_iter().map(|(src, dst)| Edge { src, dst, c: q(1) }).collect();
    Dag::new(ids, vec![q(1); n], edges).expect("G(n) is a DAG")
}
