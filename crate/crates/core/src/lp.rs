//! Exact linear programming (two-phase simplex with Bland's rule) and
//! Edmonds-Karp maximum flow over rationals.

use std::collections::VecDeque;

use num::{Signed, Zero};

use crate::rational::Q;

/// Outcome of [`simplex_max`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Optimal { x: Vec<Q>, value: Q },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    obj: Vec<Q>,
    allowed: Vec<bool>,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.obj.len() - 1
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v = &*v / &p;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v = &*v - &f * pv;
                }
            }
        }
        if !self.obj[c].is_zero() {
            let f = self.obj[c].clone();
            for (v, pv) in self.obj.iter_mut().zip(&prow) {
                *v = &*v - &f * pv;
            }
        }
        self.basis[r] = c;
    }

    fn set_objective(&mut self, c: &[Q]) {
        let mut obj: Vec<Q> = c.to_vec();
        obj.push(Q::zero());
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            if !c[b].is_zero() {
                for (v, rv) in obj.iter_mut().zip(row) {
                    *v = &*v - &c[b] * rv;
                }
            }
        }
        self.obj = obj;
    }

    /// Bland's rule iterations; returns false when unbounded.
    fn optimize(&mut self) -> bool {
        let rhs = self.rhs();
        loop {
            let Some(c) = (0..rhs).find(|&j| self.allowed[j] && self.obj[j].is_positive()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[rhs] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Maximize `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn simplex_max(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpResult {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for (i, (ai, bi)) in a.iter().zip(b).enumerate() {
        let neg = bi.is_negative();
        let mut row = vec![Q::zero(); width];
        for (j, v) in ai.iter().enumerate() {
            row[j] = if neg { -v } else { v.clone() };
        }
        row[n + i] = Q::from_integer(1.into());
        row[width - 1] = if neg { -bi } else { bi.clone() };
        rows.push(row);
    }
    let mut t = Tableau { rows, basis: (n..n + m).collect(), obj: Vec::new(), allowed: vec![true; n + m] };
    let mut c1 = vec![Q::zero(); n + m];
    for v in c1.iter_mut().skip(n) {
        *v = Q::from_integer((-1).into());
    }
    t.set_objective(&c1);
    t.optimize();
    if !t.obj[width - 1].is_zero() {
        return LpResult::Infeasible;
    }
    // Drive artificial variables out of the basis; drop redundant rows.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, j);
            } else {
                t.rows.remove(r);
                t.basis.remove(r);
                continue;
            }
        }
        r += 1;
    }
    for j in n..n + m {
        t.allowed[j] = false;
    }
    let mut c2 = c.to_vec();
    c2.extend(std::iter::repeat_n(Q::zero(), m));
    t.set_objective(&c2);
    if !t.optimize() {
        return LpResult::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (row, &bv) in t.rows.iter().zip(&t.basis) {
        if bv < n {
            x[bv] = row[width - 1].clone();
        }
    }
    let value = c.iter().zip(&x).fold(Q::zero(), |s, (ci, xi)| s + ci * xi);
    LpResult::Optimal { x, value }
}

/// Maximum `s`-`t` flow; `None` capacities are infinite and absent edges are
/// `Some(0)`. Returns the flow
/// value and the source side of a minimum cut.
pub fn max_flow(cap: &[Vec<Option<Q>>], s: usize, t: usize) -> (Q, Vec<bool>) {
    let n = cap.len();
    // Residual capacities; infinite edges carry `None`.
    let mut res: Vec<Vec<Option<Q>>> = cap.to_vec();
    let mut total = Q::zero();
    let positive = |c: &Option<Q>| c.as_ref().is_none_or(|v| v.is_positive());
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for w in 0..n {
                if prev[w] == usize::MAX && positive(&res[u][w]) {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if prev[t] == usize::MAX {
            let side = prev.iter().map(|&p| p != usize::MAX).collect();
            return (total, side);
        }
        let mut bottleneck: Option<Q> = None;
        let mut w = t;
        while w != s {
            let u = prev[w];
            if let Some(c) = &res[u][w] {
                bottleneck = Some(match bottleneck {
                    None => c.clone(),
                    Some(b) => b.min(c.clone()),
                });
            }
            w = u;
        }
        let f = bottleneck.expect("an augmenting path with only infinite edges means unbounded flow");
        let mut w = t;
        while w != s {
            let u = prev[w];
            if let Some(c) = res[u][w].as_mut() {
                *c = &*c - &f;
            }
            if let Some(c) = res[w][u].as_mut() {
                *c = &*c + &f;
            }
            w = u;
        }
        total += f;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    #[test]
    fn small_lp() {
        // max x + y s.t. x + 2y + s1 = 4, 3x + y + s2 = 6.
        let a = vec![vec![q(1), q(2), q(1), q(0)], vec![q(3), q(1), q(0), q(1)]];
        let r = simplex_max(&a, &[q(4), q(6)], &[q(1), q(1), q(0), q(0)]);
        match r {
            LpResult::Optimal { value, .. } => assert_eq!(value, qf(14, 5)),
            other => panic!("{other:?}"),
        }
        assert_eq!(simplex_max(&[vec![q(1)]], &[q(-1)], &[q(1)]), LpResult::Infeasible);
        assert_eq!(simplex_max(&[vec![q(1), q(-1)]], &[q(0)], &[q(1), q(0)]), LpResult::Unbounded);
    }

    #[test]
    fn small_flow() {
        let z = Some(q(0));
        let cap = vec![
            vec![z.clone(), Some(q(3)), Some(q(2)), z.clone()],
            vec![z.clone(), z.clone(), None, Some(q(1))],
            vec![z.clone(), z.clone(), z.clone(), Some(qf(5, 2))],
            vec![z.clone(), z.clone(), z.clone(), z.clone()],
        ];
        let (f, side) = max_flow(&cap, 0, 3);
        assert_eq!(f, qf(7, 2));
        assert!(side[0] && !side[3]);
    }
}
