//! ℝ-filtrations, the lattices Λ(a), weight filtrations and their iteration.
//!
//! The weight filtration is found by mass descent: starting from a balanced
//! socle filtration, the HN filtration of Λ(a) refines the support and moves
//! each refined point by `−tan φ_k · t` up to the next structural event. After
//! every step an exact candidate (tight gaps pinned to one, each string
//! balanced) is tried and accepted once Λ is semistable of phase zero.
//!
//! Λ(a) is a product over strings `{λ, λ+1, …}` of the support, and every
//! factor is built separately.

use std::cmp::Ordering;
use std::collections::HashMap;

use num::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hn::{hn_filtration, is_semistable};
use crate::lattice::{is_complemented_interval, socle, Elem, FinLattice, WeightedLattice};
use crate::rational::{q, to_f64, Gauss, Mass, Q};
use crate::{Error, Result};

/// Default cap on the number of elements of a Λ(a) factor.
pub const DEFAULT_LAMBDA_CAP: usize = 1_000_000;

/// Default cap on descent iterations.
pub const DEFAULT_ITERATION_CAP: usize = 10_000;

/// A chain `b₀ = 0 < … < bₙ = 1` with labels `λ₁ < … < λₙ`; step `k`
/// (zero-based) is `[b_k, b_{k+1}]` with label `labels[k]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RFiltration {
    pub chain: Vec<Elem>,
    pub labels: Vec<Q>,
}

impl RFiltration {
    pub fn new(l: &FinLattice, chain: Vec<Elem>, labels: Vec<Q>) -> Result<RFiltration> {
        if chain.len() != labels.len() + 1 {
            return Err(Error::Invalid("chain must have one more element than labels".into()));
        }
        if chain[0] != l.bottom() || *chain.last().expect("nonempty") != l.top() {
            return Err(Error::Invalid("chain must run from bottom to top".into()));
        }
        if chain.windows(2).any(|w| !l.lt(w[0], w[1])) {
            return Err(Error::Invalid("chain must be strictly increasing".into()));
        }
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("labels must be strictly increasing".into()));
        }
        Ok(RFiltration { chain, labels })
    }

    /// Single jump at `0` (or no jump for a one-element lattice).
    pub fn trivial(l: &FinLattice) -> RFiltration {
        if l.bottom() == l.top() {
            return RFiltration { chain: vec![l.bottom()], labels: vec![] };
        }
        RFiltration { chain: vec![l.bottom(), l.top()], labels: vec![Q::zero()] }
    }

    pub fn support(&self) -> &[Q] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `a₊(λ)`: the last chain element with label `≤ λ`.
    pub fn a_plus(&self, lam: &Q) -> Elem {
        self.chain[self.labels.iter().take_while(|x| *x <= lam).count()]
    }

    /// `a₋(λ)`: the last chain element with label `< λ`.
    pub fn a_minus(&self, lam: &Q) -> Elem {
        self.chain[self.labels.iter().take_while(|x| *x < lam).count()]
    }

    /// `X` of every step.
    pub fn step_x(&self, wl: &WeightedLattice) -> Vec<Q> {
        self.chain.windows(2).map(|w| wl.x_interval(w[0], w[1])).collect()
    }
}

/// Whether every `[a₊(λ), a₊(λ+1)]` is complemented.
pub fn is_paracomplemented(l: &FinLattice, a: &RFiltration) -> bool {
    a.labels
        .iter()
        .flat_map(|lam| [lam.clone(), lam - q(1)])
        .all(|lam| is_complemented_interval(l, a.a_plus(&lam), a.a_plus(&(&lam + q(1)))))
}

/// `½ min(pairwise gaps, gaps − 1 for gaps > 1, 1)`.
pub fn rho(a: &RFiltration) -> Q {
    let mut m = q(1);
    for (i, x) in a.labels.iter().enumerate() {
        for y in &a.labels[i + 1..] {
            let gap = y - x;
            if gap < m {
                m = gap.clone();
            }
            if gap > q(1) && &gap - q(1) < m {
                m = gap - q(1);
            }
        }
    }
    m / q(2)
}

/// One factor of Λ(a): the tuples over a string `λ, λ+1, …` of the support.
#[derive(Clone, Debug)]
pub struct LambdaFactor {
    /// Zero-based step indices of the string, in increasing label order.
    pub steps: Vec<usize>,
    pub lattice: FinLattice,
    /// For each element, the tuple `(x_λ)` of elements of the base lattice.
    pub tuples: Vec<Vec<Elem>>,
    pub z: Vec<Gauss>,
}

/// Λ(a) as a product of string factors.
#[derive(Clone, Debug)]
pub struct LambdaLattice {
    pub base: RFiltration,
    pub factors: Vec<LambdaFactor>,
    /// `(factor, position)` of every step of the base filtration.
    pub position: Vec<(usize, usize)>,
}

/// One step of the HN filtration of Λ(a), merged across factors.
#[derive(Clone, Debug)]
pub struct LambdaHnStep {
    pub value: Gauss,
    /// For each step of the base filtration, the component after this HN step.
    pub after: Vec<Elem>,
}

/// Strings of the support: maximal runs `λ, λ+1, λ+2, …`.
pub fn strings(labels: &[Q]) -> Vec<Vec<usize>> {
    let mut used = vec![false; labels.len()];
    let mut out = Vec::new();
    for k in 0..labels.len() {
        if used[k] || labels.iter().any(|x| *x == &labels[k] - q(1)) {
            continue;
        }
        let mut s = vec![k];
        used[k] = true;
        let mut cur = labels[k].clone();
        while let Some(j) = labels.iter().position(|x| *x == &cur + q(1)) {
            used[j] = true;
            s.push(j);
            cur = &cur + q(1);
        }
        out.push(s);
    }
    out
}

/// Build Λ(a) with its polarization `Z = Σ (1 + λi) X`.
pub fn lambda_lattice(wl: &WeightedLattice, a: &RFiltration) -> Result<LambdaLattice> {
    lambda_lattice_capped(wl, a, DEFAULT_LAMBDA_CAP)
}

pub fn lambda_lattice_capped(wl: &WeightedLattice, a: &RFiltration, cap: usize) -> Result<LambdaLattice> {
    let l = &wl.lattice;
    if !is_paracomplemented(l, a) {
        return Err(Error::NotParacomplemented(format!("labels {:?}", a.labels)));
    }
    let mut factors = Vec::new();
    let mut position = vec![(0, 0); a.len()];
    for (fi, steps) in strings(&a.labels).into_iter().enumerate() {
        for (p, &k) in steps.iter().enumerate() {
            position[k] = (fi, p);
        }
        factors.push(build_factor(wl, a, steps, cap)?);
    }
    Ok(LambdaLattice { base: a.clone(), factors, position })
}

fn build_factor(wl: &WeightedLattice, a: &RFiltration, steps: Vec<usize>, cap: usize) -> Result<LambdaFactor> {
    let l = &wl.lattice;
    let ranges: Vec<Vec<Elem>> = steps.iter().map(|&k| l.interval(a.chain[k], a.chain[k + 1])).collect();
    let mut tuples: Vec<Vec<Elem>> = Vec::new();
    let mut cur: Vec<Elem> = Vec::with_capacity(steps.len());
    fn rec(
        l: &FinLattice,
        ranges: &[Vec<Elem>],
        cur: &mut Vec<Elem>,
        out: &mut Vec<Vec<Elem>>,
        cap: usize,
    ) -> Result<()> {
        let j = cur.len();
        if j == ranges.len() {
            if out.len() >= cap {
                return Err(Error::TooLarge(format!("Λ factor exceeds {cap} elements")));
            }
            out.push(cur.clone());
            return Ok(());
        }
        for &x in &ranges[j] {
            if j > 0 && !is_complemented_interval(l, cur[j - 1], x) {
                continue;
            }
            cur.push(x);
            rec(l, ranges, cur, out, cap)?;
            cur.pop();
        }
        Ok(())
    }
    rec(l, &ranges, &mut cur, &mut tuples, cap)?;
    let lows: Vec<Elem> = steps.iter().map(|&k| a.chain[k]).collect();
    let lams: Vec<Gauss> = steps.iter().map(|&k| Gauss::new(q(1), a.labels[k].clone())).collect();
    let z: Vec<Gauss> = tuples
        .iter()
        .map(|t| {
            t.iter()
                .zip(&lows)
                .zip(&lams)
                .fold(Gauss::zero(), |acc, ((&x, &lo), lam)| &acc + &lam.scale(&wl.x_interval(lo, x)))
        })
        .collect();
    let names: Vec<String> = tuples
        .iter()
        .map(|t| format!("[{}]", t.iter().map(|&x| l.name(x)).collect::<Vec<_>>().join(";")))
        .collect();
    let lattice = if l.is_set_backed() {
        let masks = tuples
            .iter()
            .map(|t| {
                t.iter().zip(&lows).fold(0u64, |m, (&x, &lo)| {
                    m | (l.mask(x).expect("set-backed") & !l.mask(lo).expect("set-backed"))
                })
            })
            .collect();
        FinLattice::from_sets_unchecked(names, masks)
    } else {
        let index: HashMap<Vec<Elem>, usize> = tuples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        let comb = |x: usize, y: usize, f: &dyn Fn(Elem, Elem) -> Elem| -> usize {
            let t: Vec<Elem> = tuples[x].iter().zip(&tuples[y]).map(|(&p, &q)| f(p, q)).collect();
            index[&t]
        };
        FinLattice::from_ops(
            names,
            |x, y| comb(x, y, &|p, q| l.meet(p, q)),
            |x, y| comb(x, y, &|p, q| l.join(p, q)),
        )
    };
    Ok(LambdaFactor { steps, lattice, tuples, z })
}

impl LambdaLattice {
    /// Number of elements of the product.
    pub fn size(&self) -> usize {
        self.factors.iter().map(|f| f.lattice.len()).product()
    }

    /// Total `Z(Λ)`.
    pub fn total(&self) -> Gauss {
        self.factors.iter().fold(Gauss::zero(), |acc, f| &acc + &f.z[f.lattice.top()])
    }

    /// HN filtration of the product: factor pieces merged by phase.
    pub fn hn(&self) -> Vec<LambdaHnStep> {
        let mut pieces: Vec<(usize, Elem, Gauss)> = Vec::new();
        for (fi, f) in self.factors.iter().enumerate() {
            let h = hn_filtration(&f.lattice, &f.z);
            for (k, v) in h.values.iter().enumerate() {
                pieces.push((fi, h.chain[k + 1], v.clone()));
            }
        }
        // Stable sort keeps each factor's pieces in HN order.
        pieces.sort_by(|a, b| b.2.cmp_phase(&a.2));
        let mut state: Vec<Elem> = self.factors.iter().map(|f| f.lattice.bottom()).collect();
        let mut out: Vec<LambdaHnStep> = Vec::new();
        let mut i = 0;
        while i < pieces.len() {
            let mut value = Gauss::zero();
            let mut j = i;
            while j < pieces.len() && pieces[j].2.cmp_phase(&pieces[i].2) == Ordering::Equal {
                value = &value + &pieces[j].2;
                state[pieces[j].0] = pieces[j].1;
                j += 1;
            }
            let after = (0..self.base.len())
                .map(|k| {
                    let (fi, p) = self.position[k];
                    self.factors[fi].tuples[state[fi]][p]
                })
                .collect();
            out.push(LambdaHnStep { value, after });
            i = j;
        }
        out
    }

    /// Whether Λ is semistable of phase zero.
    pub fn is_semistable_phase_zero(&self) -> bool {
        self.factors
            .iter()
            .all(|f| f.z[f.lattice.top()].im.is_zero() && is_semistable(&f.lattice, &f.z))
    }

    pub fn mass(&self) -> Mass {
        Mass::from_values(&self.hn().into_iter().map(|s| s.value).collect::<Vec<_>>())
    }
}

/// A derived lattice `L′` together with the base-lattice tuple of each element.
#[derive(Clone, Debug)]
pub struct DerivedLattice {
    pub weighted: WeightedLattice,
    /// For each element, its component in every step of the base filtration.
    pub tuples: Vec<Vec<Elem>>,
}

/// `L′ = {x : x = 0 or φ([0,x]) = 0}` with `X = Re Z`.
pub fn phase_zero_sublattice(lam: &LambdaLattice) -> Result<DerivedLattice> {
    if !lam.is_semistable_phase_zero() {
        return Err(Error::NotSemistable("Λ(a) is not semistable of phase zero".into()));
    }
    let n_steps = lam.base.len();
    let mut acc: Option<(FinLattice, Vec<Q>, Vec<Vec<Option<Elem>>>)> = None;
    for f in &lam.factors {
        let elems: Vec<Elem> = (0..f.lattice.len()).filter(|&e| f.z[e].im.is_zero()).collect();
        let sub = f.lattice.sublattice(&elems);
        let x: Vec<Q> = elems.iter().map(|&e| f.z[e].re.clone()).collect();
        let tup: Vec<Vec<Option<Elem>>> = elems
            .iter()
            .map(|&e| {
                let mut t = vec![None; n_steps];
                for (p, &k) in f.steps.iter().enumerate() {
                    t[k] = Some(f.tuples[e][p]);
                }
                t
            })
            .collect();
        acc = Some(match acc {
            None => (sub, x, tup),
            Some((al, ax, at)) => {
                let nb = sub.len();
                let prod = FinLattice::product(&al, &sub);
                let px = (0..prod.len()).map(|k| &ax[k / nb] + &x[k % nb]).collect();
                let pt = (0..prod.len())
                    .map(|k| at[k / nb].iter().zip(&tup[k % nb]).map(|(p, q)| p.or(*q)).collect())
                    .collect();
                (prod, px, pt)
            }
        });
    }
    let (lattice, x, tuples) = acc.ok_or_else(|| Error::Invalid("empty filtration".into()))?;
    let tuples = tuples.into_iter().map(|t| t.into_iter().map(|e| e.expect("every step covered")).collect()).collect();
    Ok(DerivedLattice { weighted: WeightedLattice { lattice, x }, tuples })
}

/// Socle filtration with unit gaps, shifted to satisfy balancing.
fn socle_start(wl: &WeightedLattice) -> RFiltration {
    let l = &wl.lattice;
    let mut chain = vec![l.bottom()];
    while *chain.last().expect("nonempty") != l.top() {
        chain.push(socle(l, *chain.last().expect("nonempty"), l.top()));
    }
    let mut a = RFiltration { chain, labels: Vec::new() };
    let xs = a.step_x(wl);
    let total: Q = xs.iter().fold(Q::zero(), |s, x| s + x);
    let moment: Q = xs.iter().enumerate().fold(Q::zero(), |s, (k, x)| s + q(k as i64) * x);
    let c = -(moment / total);
    a.labels = (0..xs.len()).map(|k| &c + q(k as i64)).collect();
    a
}

/// Exact candidate: same chain, every string balanced on its own.
fn snap(wl: &WeightedLattice, a: &RFiltration) -> Option<RFiltration> {
    let xs = a.step_x(wl);
    let mut labels = a.labels.clone();
    for s in strings(&a.labels) {
        let total: Q = s.iter().fold(Q::zero(), |acc, &k| acc + &xs[k]);
        let moment: Q = s.iter().enumerate().fold(Q::zero(), |acc, (j, &k)| acc + q(j as i64) * &xs[k]);
        let c = -(moment / total);
        for (j, &k) in s.iter().enumerate() {
            labels[k] = &c + q(j as i64);
        }
    }
    if labels == a.labels || labels.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    let cand = RFiltration { chain: a.chain.clone(), labels };
    if !is_paracomplemented(&wl.lattice, &cand) {
        return None;
    }
    let lam = lambda_lattice(wl, &cand).ok()?;
    lam.is_semistable_phase_zero().then_some(cand)
}

struct Point {
    elem: Elem,
    mu: Q,
    s: Q,
}

/// Deform the refined filtration up to the first structural event (or `t = 1`).
fn descent_step(wl: &WeightedLattice, a: &RFiltration, steps: &[LambdaHnStep]) -> RFiltration {
    let l = &wl.lattice;
    let mut points: Vec<Point> = Vec::new();
    for k in 0..a.len() {
        let mut before = a.chain[k];
        for st in steps {
            let after = st.after[k];
            if after != before {
                points.push(Point { elem: after, mu: a.labels[k].clone(), s: &st.value.im / &st.value.re });
                before = after;
            }
        }
    }
    let mut t_star = q(1);
    for (i, p) in points.iter().enumerate() {
        for r in &points[i + 1..] {
            let ds = &r.s - &p.s;
            if ds.is_zero() {
                continue;
            }
            let g0 = &r.mu - &p.mu;
            for target in [-1, 0, 1] {
                let t = (&g0 - q(target)) / &ds;
                if t.is_positive() && t < t_star {
                    t_star = t;
                }
            }
        }
    }
    let mut chain = vec![l.bottom()];
    let mut labels: Vec<Q> = Vec::new();
    for p in points {
        let pos = &p.mu - &p.s * &t_star;
        if labels.last() == Some(&pos) {
            *chain.last_mut().expect("nonempty") = p.elem;
        } else {
            debug_assert!(labels.last().is_none_or(|x| *x < pos));
            labels.push(pos);
            chain.push(p.elem);
        }
    }
    RFiltration { chain, labels }
}

/// Tuning knobs for [`weight_filtration_with`].
#[derive(Clone, Debug)]
pub struct DescentOptions {
    pub max_iterations: usize,
    pub lambda_cap: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions { max_iterations: DEFAULT_ITERATION_CAP, lambda_cap: DEFAULT_LAMBDA_CAP }
    }
}

/// Trace of a descent run.
#[derive(Clone, Debug, Default)]
pub struct DescentTrace {
    pub masses: Vec<f64>,
    pub iterations: usize,
}

/// The weight filtration of `(L, X)`.
pub fn weight_filtration(wl: &WeightedLattice) -> Result<RFiltration> {
    weight_filtration_with(wl, &DescentOptions::default()).map(|(a, _)| a)
}

pub fn weight_filtration_with(wl: &WeightedLattice, opts: &DescentOptions) -> Result<(RFiltration, DescentTrace)> {
    let l = &wl.lattice;
    if l.bottom() == l.top() {
        return Ok((RFiltration::trivial(l), DescentTrace::default()));
    }
    let mut a = socle_start(wl);
    let mut trace = DescentTrace::default();
    let mut prev_mass: Option<Mass> = None;
    let bound_c = 4.0 / to_f64(&wl.x_min());
    for it in 0..opts.max_iterations {
        trace.iterations = it;
        debug_assert!(is_paracomplemented(l, &a));
        let lam = lambda_lattice_capped(wl, &a, opts.lambda_cap)?;
        let steps = lam.hn();
        let mass = Mass::from_values(&steps.iter().map(|s| s.value.clone()).collect::<Vec<_>>());
        trace.masses.push(mass.to_f64());
        if steps.len() == 1 && steps[0].value.im.is_zero() {
            return Ok((a, trace));
        }
        if let Some(b) = snap(wl, &a) {
            return Ok((b, trace));
        }
        if let Some(pm) = &prev_mass {
            debug_assert_eq!(mass.cmp_exact(pm), Ordering::Less, "mass must decrease along the descent");
        }
        debug_assert!(
            a.labels.iter().all(|x| to_f64(x).abs() <= bound_c * mass.to_f64() + 1e-9),
            "support bound violated"
        );
        prev_mass = Some(mass);
        a = descent_step(wl, &a, &steps);
    }
    Err(Error::NonConvergence(opts.max_iterations))
}

/// Brute-force check of the three defining conditions of a weight filtration.
pub fn verify_weight_filtration(wl: &WeightedLattice, a: &RFiltration) -> bool {
    verify_weight_filtration_capped(wl, a, 1_000_000, 0)
}

/// As [`verify_weight_filtration`]; above `cap` tuples, condition 3 is
/// checked on random samples drawn with `seed`.
pub fn verify_weight_filtration_capped(wl: &WeightedLattice, a: &RFiltration, cap: usize, seed: u64) -> bool {
    let l = &wl.lattice;
    if RFiltration::new(l, a.chain.clone(), a.labels.clone()).is_err() {
        return false;
    }
    let n = a.len();
    let b = &a.chain;
    let lam = &a.labels;
    // (1) [b_{k−1}, b_l] complemented whenever λ_l − λ_k < 1.
    for k in 0..n {
        for l_ in k..n {
            if &lam[l_] - &lam[k] < q(1) && !is_complemented_interval(l, b[k], b[l_ + 1]) {
                return false;
            }
        }
    }
    // (2) balancing.
    let xs = a.step_x(wl);
    if !lam.iter().zip(&xs).fold(Q::zero(), |s, (x, y)| s + x * y).is_zero() {
        return false;
    }
    // (3) Σ λ_k X([b_{k−1}, F_k]) ≤ 0 over admissible tuples.
    let ranges: Vec<Vec<Elem>> = (0..n).map(|k| l.interval(b[k], b[k + 1])).collect();
    let admissible = |f: &[Elem]| -> bool {
        (0..f.len()).all(|k| {
            (k + 1..f.len())
                .all(|m| &lam[m] - &lam[k] > q(1) || is_complemented_interval(l, f[k], f[m]))
        })
    };
    let value = |f: &[Elem]| -> Q { (0..n).fold(Q::zero(), |s, k| s + &lam[k] * wl.x_interval(b[k], f[k])) };
    let total: f64 = ranges.iter().map(|r| r.len() as f64).product();
    if total <= cap as f64 {
        let mut cur: Vec<Elem> = Vec::with_capacity(n);
        fn rec(
            ranges: &[Vec<Elem>],
            cur: &mut Vec<Elem>,
            ok: &dyn Fn(&[Elem]) -> bool,
            val: &dyn Fn(&[Elem]) -> Q,
        ) -> bool {
            if cur.len() == ranges.len() {
                return val(cur) <= Q::zero();
            }
            for &x in &ranges[cur.len()] {
                cur.push(x);
                let good = !ok(cur) || rec(ranges, cur, ok, val);
                cur.pop();
                if !good {
                    return false;
                }
            }
            true
        }
        rec(&ranges, &mut cur, &admissible, &value)
    } else {
        log::warn!("condition 3 has {total:.0} tuples; checking {cap} random samples");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..cap).all(|_| {
            let f: Vec<Elem> = ranges.iter().map(|r| r[rng.gen_range(0..r.len())]).collect();
            !admissible(&f) || value(&f) <= Q::zero()
        })
    }
}

/// One level of an iterated weight filtration.
#[derive(Clone, Debug)]
pub struct Level {
    pub lattice: WeightedLattice,
    pub filtration: RFiltration,
}

/// The iterated weight filtration and its flattening to an `ℝ^N`-filtration.
#[derive(Clone, Debug)]
pub struct IteratedFiltration {
    pub levels: Vec<Level>,
    pub depth: usize,
    /// Chain in the original lattice with lexicographically increasing labels.
    pub chain: Vec<Elem>,
    pub labels: Vec<Vec<Q>>,
}

impl IteratedFiltration {
    /// Label of the step at which each element of `set` first appears; for
    /// set-backed lattices with singleton steps this is the per-vertex label.
    pub fn labels_by_vertex(&self, l: &FinLattice) -> Option<Vec<(usize, Vec<Q>)>> {
        let mut out = Vec::new();
        for (k, w) in self.chain.windows(2).enumerate() {
            let diff = l.mask(w[1])? & !l.mask(w[0])?;
            for i in 0..64 {
                if diff >> i & 1 == 1 {
                    out.push((i, self.labels[k].clone()));
                }
            }
        }
        out.sort();
        Some(out)
    }
}

/// Iterate weight filtration, Λ and phase-zero sublattice until complemented.
pub fn iterated_weight_filtration(wl: &WeightedLattice) -> Result<IteratedFiltration> {
    let base = &wl.lattice;
    let mut levels: Vec<Level> = Vec::new();
    let mut cur = wl.clone();
    // realize[e][p]: base element of `e` at label path `paths[p]`.
    let mut paths: Vec<Vec<Q>> = vec![vec![]];
    let mut realize: Vec<Vec<Elem>> = (0..base.len()).map(|e| vec![e]).collect();
    while !is_complemented_interval(&cur.lattice, cur.lattice.bottom(), cur.lattice.top()) {
        if levels.len() >= 64 {
            return Err(Error::NonConvergence(levels.len()));
        }
        let a = weight_filtration(&cur)?;
        let lam = lambda_lattice(&cur, &a)?;
        let derived = phase_zero_sublattice(&lam)?;
        let mut next_paths = Vec::new();
        for p in &paths {
            for lab in &a.labels {
                let mut np = p.clone();
                np.push(lab.clone());
                next_paths.push(np);
            }
        }
        let s = a.len();
        let next_realize: Vec<Vec<Elem>> = derived
            .tuples
            .iter()
            .map(|t| {
                let mut r = Vec::with_capacity(paths.len() * s);
                for p in 0..paths.len() {
                    for &y in t.iter().take(s) {
                        r.push(realize[y][p]);
                    }
                }
                r
            })
            .collect();
        levels.push(Level { lattice: cur, filtration: a });
        cur = derived.weighted;
        paths = next_paths;
        realize = next_realize;
    }
    // The last lattice is complemented: its weight filtration is trivial at 0,
    // which contributes no further label.
    let mut chain = vec![base.bottom()];
    let mut labels: Vec<Vec<Q>> = Vec::new();
    let top = cur.lattice.top();
    for (p, path) in paths.iter().enumerate() {
        let e = realize[top][p];
        if e != *chain.last().expect("nonempty") {
            debug_assert!(base.lt(*chain.last().expect("nonempty"), e));
            chain.push(e);
            labels.push(path.clone());
        }
    }
    let depth = levels.len();
    Ok(IteratedFiltration { levels, depth, chain, labels })
}

/// Check that a rational is one; convenience for callers comparing labels.
pub fn is_one(x: &Q) -> bool {
    x.is_one()
}
