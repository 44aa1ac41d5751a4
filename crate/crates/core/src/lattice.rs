//! Finite bounded lattices with table or bitmask-backed meets and joins.
//!
//! Lattices that arise as sublattices of a power set (closed subgraphs and
//! everything derived from them) are stored as bitmasks, so meet and join are
//! `&`/`|` followed by a hash lookup. Other lattices carry full tables.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use crate::rational::{Gauss, Q};
use crate::{Error, Result};

/// Index of a lattice element; the insertion order is the deterministic
/// element order used for all tie-breaks.
pub type Elem = usize;

type Bits = Vec<u64>;

fn bits_new(n: usize) -> Bits {
    vec![0; n.div_ceil(64)]
}

fn bit_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bit_get(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn bits_count(b: &Bits) -> u32 {
    b.iter().map(|w| w.count_ones()).sum()
}

fn bits_iter(b: &Bits) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(k, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                return None;
            }
            let t = w.trailing_zeros() as usize;
            w &= w - 1;
            Some(k * 64 + t)
        })
    })
}

#[derive(Clone, Debug)]
enum Ops {
    Table { meet: Vec<u32>, join: Vec<u32>, leq: Vec<Bits> },
    Sets { masks: Vec<u64>, index: HashMap<u64, u32> },
}

/// A finite bounded lattice.
#[derive(Clone, Debug)]
pub struct FinLattice {
    names: Vec<String>,
    ops: Ops,
    bottom: Elem,
    top: Elem,
    up: Vec<Vec<Elem>>,
    down: Vec<Vec<Elem>>,
    height: Vec<usize>,
}

impl FinLattice {
    /// Build from element names and generating order pairs `(a, b)` meaning
    /// `a ≤ b`. The reflexive-transitive closure is taken.
    pub fn build(names: Vec<String>, leq_pairs: &[(Elem, Elem)]) -> Result<FinLattice> {
        let n = names.len();
        if n == 0 {
            return Err(Error::NoBounds("empty poset".into()));
        }
        let mut leq: Vec<Bits> = (0..n)
            .map(|i| {
                let mut b = bits_new(n);
                bit_set(&mut b, i);
                b
            })
            .collect();
        for &(a, b) in leq_pairs {
            if a >= n || b >= n {
                return Err(Error::Invalid(format!("order pair ({a}, {b}) out of range")));
            }
            bit_set(&mut leq[a], b);
        }
        for k in 0..n {
            let row = leq[k].clone();
            for l in leq.iter_mut() {
                if bit_get(l, k) {
                    for (w, r) in l.iter_mut().zip(&row) {
                        *w |= r;
                    }
                }
            }
        }
        for i in 0..n {
            for j in bits_iter(&leq[i]) {
                if j != i && bit_get(&leq[j], i) {
                    return Err(Error::NotALattice(format!(
                        "{} and {} are mutually below each other",
                        names[i], names[j]
                    )));
                }
            }
        }
        let mut geq: Vec<Bits> = vec![bits_new(n); n];
        for i in 0..n {
            for j in bits_iter(&leq[i]) {
                bit_set(&mut geq[j], i);
            }
        }
        let bottom = (0..n)
            .find(|&i| bits_count(&leq[i]) as usize == n)
            .ok_or_else(|| Error::NoBounds("no least element".into()))?;
        let top = (0..n)
            .find(|&i| bits_count(&geq[i]) as usize == n)
            .ok_or_else(|| Error::NoBounds("no greatest element".into()))?;
        // geq[i] is the down-set of i, leq[i] its up-set.
        let bound = |sets: &Vec<Bits>, a: usize, b: usize| -> Option<u32> {
            let common: Bits = sets[a].iter().zip(&sets[b]).map(|(x, y)| x & y).collect();
            let best = bits_iter(&common).max_by_key(|&c| (bits_count(&sets[c]), std::cmp::Reverse(c)))?;
            (sets[best] == common).then_some(best as u32)
        };
        let mut meet = vec![0u32; n * n];
        let mut join = vec![0u32; n * n];
        for a in 0..n {
            for b in a..n {
                let m = bound(&geq, a, b).ok_or_else(|| {
                    Error::NotALattice(format!("{} and {} have no unique meet", names[a], names[b]))
                })?;
                let j = bound(&leq, a, b).ok_or_else(|| {
                    Error::NotALattice(format!("{} and {} have no unique join", names[a], names[b]))
                })?;
                meet[a * n + b] = m;
                meet[b * n + a] = m;
                join[a * n + b] = j;
                join[b * n + a] = j;
            }
        }
        Ok(Self::finish(names, Ops::Table { meet, join, leq }, bottom, top))
    }

    /// Build from meet and join functions on `0..n`.
    pub fn from_ops(
        names: Vec<String>,
        meet: impl Fn(Elem, Elem) -> Elem,
        join: impl Fn(Elem, Elem) -> Elem,
    ) -> FinLattice {
        let n = names.len();
        let mut mt = vec![0u32; n * n];
        let mut jt = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mt[a * n + b] = meet(a, b) as u32;
                jt[a * n + b] = join(a, b) as u32;
            }
        }
        let mut leq = vec![bits_new(n); n];
        for a in 0..n {
            for b in 0..n {
                if mt[a * n + b] as usize == a {
                    bit_set(&mut leq[a], b);
                }
            }
        }
        let bottom = (0..n).fold(0, |acc, x| mt[acc * n + x] as usize);
        let top = (0..n).fold(0, |acc, x| jt[acc * n + x] as usize);
        Self::finish(names, Ops::Table { meet: mt, join: jt, leq }, bottom, top)
    }

    /// Build a sublattice of the power set of `0..64` from its member sets.
    pub fn from_sets(names: Vec<String>, masks: Vec<u64>) -> Result<FinLattice> {
        if masks.is_empty() {
            return Err(Error::NoBounds("empty family".into()));
        }
        let mut index = HashMap::with_capacity(masks.len());
        for (i, &m) in masks.iter().enumerate() {
            if index.insert(m, i as u32).is_some() {
                return Err(Error::NotALattice(format!("duplicate set {m:#x}")));
            }
        }
        let lo = masks.iter().fold(u64::MAX, |a, &m| a & m);
        let hi = masks.iter().fold(0, |a, &m| a | m);
        let bottom = *index.get(&lo).ok_or_else(|| Error::NoBounds("intersection missing".into()))? as usize;
        let top = *index.get(&hi).ok_or_else(|| Error::NoBounds("union missing".into()))? as usize;
        for &a in &masks {
            for &b in &masks {
                if !index.contains_key(&(a & b)) || !index.contains_key(&(a | b)) {
                    return Err(Error::NotALattice(format!("{a:#x} and {b:#x} not closed")));
                }
            }
        }
        Ok(Self::finish(names, Ops::Sets { masks, index }, bottom, top))
    }

    /// Like [`FinLattice::from_sets`] without the quadratic closure check.
    pub(crate) fn from_sets_unchecked(names: Vec<String>, masks: Vec<u64>) -> FinLattice {
        let index: HashMap<u64, u32> = masks.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        let lo = masks.iter().fold(u64::MAX, |a, &m| a & m);
        let hi = masks.iter().fold(0, |a, &m| a | m);
        let (bottom, top) = (index[&lo] as usize, index[&hi] as usize);
        Self::finish(names, Ops::Sets { masks, index }, bottom, top)
    }

    fn finish(names: Vec<String>, ops: Ops, bottom: Elem, top: Elem) -> FinLattice {
        let n = names.len();
        let up: Vec<Vec<Elem>> = match &ops {
            Ops::Table { leq, .. } => {
                let strict_up: Vec<Bits> = (0..n)
                    .map(|a| {
                        let mut b = leq[a].clone();
                        b[a / 64] &= !(1 << (a % 64));
                        b
                    })
                    .collect();
                let mut strict_down = vec![bits_new(n); n];
                for a in 0..n {
                    for b in bits_iter(&strict_up[a]) {
                        bit_set(&mut strict_down[b], a);
                    }
                }
                (0..n)
                    .map(|a| {
                        bits_iter(&strict_up[a])
                            .filter(|&b| strict_up[a].iter().zip(&strict_down[b]).all(|(x, y)| x & y == 0))
                            .collect()
                    })
                    .collect()
            }
            Ops::Sets { masks, index } => {
                let full = masks[top];
                let principal: Vec<u64> = (0..64)
                    .map(|i| {
                        if full >> i & 1 == 0 {
                            0
                        } else {
                            masks.iter().filter(|&&m| m >> i & 1 == 1).fold(u64::MAX, |a, &m| a & m)
                        }
                    })
                    .collect();
                masks
                    .iter()
                    .map(|&s| {
                        let mut cands: Vec<u64> = (0..64)
                            .filter(|&i| full >> i & 1 == 1 && s >> i & 1 == 0)
                            .map(|i| s | principal[i])
                            .collect();
                        cands.sort_unstable();
                        cands.dedup();
                        let minimal: Vec<u64> = cands
                            .iter()
                            .copied()
                            .filter(|&c| !cands.iter().any(|&d| d != c && d & !c == 0))
                            .collect();
                        let mut out: Vec<Elem> = minimal.iter().map(|c| index[c] as usize).collect();
                        out.sort_unstable();
                        out
                    })
                    .collect()
            }
        };
        let mut down = vec![Vec::new(); n];
        for (a, ups) in up.iter().enumerate() {
            for &b in ups {
                down[b].push(a);
            }
        }
        // Longest-chain heights via Kahn order on the cover graph.
        let mut indeg: Vec<usize> = down.iter().map(Vec::len).collect();
        let mut height = vec![0usize; n];
        let mut stack = vec![bottom];
        while let Some(a) = stack.pop() {
            for &b in &up[a] {
                height[b] = height[b].max(height[a] + 1);
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    stack.push(b);
                }
            }
        }
        FinLattice { names, ops, bottom, top, up, down, height }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn name(&self, e: Elem) -> &str {
        &self.names[e]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Look up an element by name.
    pub fn find(&self, name: &str) -> Option<Elem> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        match &self.ops {
            Ops::Table { leq, .. } => bit_get(&leq[a], b),
            Ops::Sets { masks, .. } => masks[a] & !masks[b] == 0,
        }
    }

    pub fn lt(&self, a: Elem, b: Elem) -> bool {
        a != b && self.leq(a, b)
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        match &self.ops {
            Ops::Table { meet, .. } => meet[a * self.len() + b] as usize,
            Ops::Sets { masks, index } => index[&(masks[a] & masks[b])] as usize,
        }
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        match &self.ops {
            Ops::Table { join, .. } => join[a * self.len() + b] as usize,
            Ops::Sets { masks, index } => index[&(masks[a] | masks[b])] as usize,
        }
    }

    pub fn upper_covers(&self, a: Elem) -> &[Elem] {
        &self.up[a]
    }

    pub fn lower_covers(&self, a: Elem) -> &[Elem] {
        &self.down[a]
    }

    /// Length of a longest chain from the bottom; the rank function when modular.
    pub fn height(&self, a: Elem) -> usize {
        self.height[a]
    }

    /// Whether `hi` covers `lo`.
    pub fn covers(&self, hi: Elem, lo: Elem) -> bool {
        self.up[lo].contains(&hi)
    }

    /// The bitmask of an element when the lattice is set-backed.
    pub fn mask(&self, e: Elem) -> Option<u64> {
        match &self.ops {
            Ops::Sets { masks, .. } => Some(masks[e]),
            Ops::Table { .. } => None,
        }
    }

    /// Element with the given bitmask, for set-backed lattices.
    pub fn by_mask(&self, m: u64) -> Option<Elem> {
        match &self.ops {
            Ops::Sets { index, .. } => index.get(&m).map(|&i| i as usize),
            Ops::Table { .. } => None,
        }
    }

    pub fn is_set_backed(&self) -> bool {
        matches!(self.ops, Ops::Sets { .. })
    }

    /// Elements of `[lo, hi]` in element order.
    pub fn interval(&self, lo: Elem, hi: Elem) -> Vec<Elem> {
        (0..self.len()).filter(|&x| self.leq(lo, x) && self.leq(x, hi)).collect()
    }

    /// Join of a set of elements (the bottom for an empty set).
    pub fn join_all(&self, xs: impl IntoIterator<Item = Elem>) -> Elem {
        xs.into_iter().fold(self.bottom, |a, b| self.join(a, b))
    }

    /// Restrict to a subset closed under meet and join.
    pub fn sublattice(&self, elems: &[Elem]) -> FinLattice {
        let names: Vec<String> = elems.iter().map(|&e| self.names[e].clone()).collect();
        match &self.ops {
            Ops::Sets { masks, .. } => Self::from_sets_unchecked(names, elems.iter().map(|&e| masks[e]).collect()),
            Ops::Table { .. } => {
                let pos: HashMap<Elem, Elem> = elems.iter().enumerate().map(|(i, &e)| (e, i)).collect();
                Self::from_ops(
                    names,
                    |a, b| pos[&self.meet(elems[a], elems[b])],
                    |a, b| pos[&self.join(elems[a], elems[b])],
                )
            }
        }
    }

    /// Cartesian product; element `(i, j)` has index `i·|b| + j`.
    pub fn product(a: &FinLattice, b: &FinLattice) -> FinLattice {
        let nb = b.len();
        let names: Vec<String> = (0..a.len() * nb)
            .map(|k| format!("({},{})", a.names[k / nb], b.names[k % nb]))
            .collect();
        if let (Ops::Sets { masks: ma, .. }, Ops::Sets { masks: mb, .. }) = (&a.ops, &b.ops) {
            let (ua, ub) = (ma[a.top] | ma[a.bottom], mb[b.top] | mb[b.bottom]);
            if ua & ub == 0 {
                let masks = (0..a.len() * nb).map(|k| ma[k / nb] | mb[k % nb]).collect();
                return Self::from_sets_unchecked(names, masks);
            }
        }
        Self::from_ops(
            names,
            |x, y| a.meet(x / nb, y / nb) * nb + b.meet(x % nb, y % nb),
            |x, y| a.join(x / nb, y / nb) * nb + b.join(x % nb, y % nb),
        )
    }

    /// Chain `0 < 1 < … < n` with `n + 1` elements.
    pub fn chain(n: usize) -> FinLattice {
        let names = (0..=n).map(|i| format!("c{i}")).collect();
        let pairs: Vec<(Elem, Elem)> = (0..n).map(|i| (i, i + 1)).collect();
        Self::build(names, &pairs).expect("chains are lattices")
    }

    /// Boolean lattice on `k` atoms, element `i` is the subset with bitmask `i`.
    pub fn boolean(k: usize) -> FinLattice {
        let names = (0..1usize << k).map(|i| format!("b{i}")).collect();
        Self::from_sets(names, (0..1u64 << k).collect()).expect("power sets are lattices")
    }

    /// `M_k`: bottom, `k` pairwise incomparable atoms, top.
    pub fn diamond(k: usize) -> FinLattice {
        let mut names = vec!["0".to_string()];
        names.extend((1..=k).map(|i| format!("a{i}")));
        names.push("1".into());
        let mut pairs = Vec::new();
        for i in 1..=k {
            pairs.push((0, i));
            pairs.push((i, k + 1));
        }
        if k == 0 {
            pairs.push((0, 1));
        }
        Self::build(names, &pairs).expect("diamonds are lattices")
    }

    /// The pentagon `N₅`: `0 < a < b < 1`, `0 < c < 1`.
    pub fn pentagon() -> FinLattice {
        let names = ["0", "a", "b", "c", "1"].map(String::from).to_vec();
        Self::build(names, &[(0, 1), (1, 2), (2, 4), (0, 3), (3, 4)]).expect("N5 is a lattice")
    }

    /// Glue `b` on top of `a`, identifying the top of `a` with the bottom of `b`.
    pub fn glue(a: &FinLattice, b: &FinLattice) -> FinLattice {
        let na = a.len();
        let mut names: Vec<String> = a.names.iter().map(|s| format!("l{s}")).collect();
        let mut map_b = vec![0; b.len()];
        for (j, s) in b.names.iter().enumerate() {
            if j == b.bottom {
                map_b[j] = a.top;
            } else {
                map_b[j] = names.len();
                names.push(format!("u{s}"));
            }
        }
        let mut pairs = Vec::new();
        for x in 0..na {
            for &y in &a.up[x] {
                pairs.push((x, y));
            }
        }
        for x in 0..b.len() {
            for &y in &b.up[x] {
                pairs.push((map_b[x], map_b[y]));
            }
        }
        Self::build(names, &pairs).expect("glued sums of lattices are lattices")
    }

    /// Relabel elements by a permutation: new element `i` is old element `perm[i]`.
    pub fn permuted(&self, perm: &[Elem]) -> FinLattice {
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let names = perm.iter().map(|&p| self.names[p].clone()).collect();
        match &self.ops {
            Ops::Sets { masks, .. } => Self::from_sets_unchecked(names, perm.iter().map(|&p| masks[p]).collect()),
            Ops::Table { .. } => Self::from_ops(
                names,
                |a, b| inv[self.meet(perm[a], perm[b])],
                |a, b| inv[self.join(perm[a], perm[b])],
            ),
        }
    }
}

/// First triple `(a, b, x)` with `a ≤ b` violating `(x∧b)∨a = (x∨a)∧b`.
pub fn check_modular(l: &FinLattice) -> Option<(Elem, Elem, Elem)> {
    for a in 0..l.len() {
        for b in 0..l.len() {
            if !l.leq(a, b) {
                continue;
            }
            for x in 0..l.len() {
                if l.join(l.meet(x, b), a) != l.meet(l.join(x, a), b) {
                    return Some((a, b, x));
                }
            }
        }
    }
    None
}

/// Grow a maximal chain from `lo` towards `hi` picking covers by `pick`.
fn greedy_chain(l: &FinLattice, lo: Elem, hi: Elem, last: bool) -> usize {
    let mut cur = lo;
    let mut len = 0;
    while cur != hi {
        let mut it = l.up[cur].iter().copied().filter(|&c| l.leq(c, hi));
        cur = if last { it.last() } else { it.next() }.expect("a cover below hi exists");
        len += 1;
    }
    len
}

/// Common length of maximal chains in `[lo, hi]` (Jordan-Hölder-Dedekind).
pub fn jh_length(l: &FinLattice, lo: Elem, hi: Elem) -> Result<usize> {
    if !l.leq(lo, hi) {
        return Err(Error::NotComparable(lo, hi));
    }
    let len = l.height(hi) - l.height(lo);
    debug_assert_eq!(greedy_chain(l, lo, hi, false), len);
    debug_assert_eq!(greedy_chain(l, lo, hi, true), len);
    Ok(len)
}

/// A perspectivity class of covering intervals.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalClass {
    pub class_id: usize,
    pub representative: (Elem, Elem),
}

/// Partition of all covering intervals into perspectivity classes.
#[derive(Clone, Debug)]
pub struct IntervalClasses {
    /// `cover_class[a][k]` is the class of `[a, upper_covers(a)[k]]`.
    pub cover_class: Vec<Vec<usize>>,
    pub classes: Vec<IntervalClass>,
}

impl IntervalClasses {
    pub fn class_of(&self, l: &FinLattice, lo: Elem, hi: Elem) -> Option<usize> {
        let k = l.up[lo].iter().position(|&c| c == hi)?;
        Some(self.cover_class[lo][k])
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Union-find over the relation `[a, a∨b] ~ [a∧b, b]`.
pub fn interval_classes(l: &FinLattice) -> IntervalClasses {
    let n = l.len();
    let mut offset = vec![0usize; n + 1];
    for a in 0..n {
        offset[a + 1] = offset[a] + l.up[a].len();
    }
    let id = |lo: Elem, hi: Elem| -> Option<usize> { l.up[lo].iter().position(|&c| c == hi).map(|k| offset[lo] + k) };
    let mut uf = UnionFind::<usize>::new(offset[n]);
    for a in 0..n {
        for b in 0..n {
            let j = l.join(a, b);
            let m = l.meet(a, b);
            if j == a || m == b {
                continue;
            }
            if let (Some(x), Some(y)) = (id(a, j), id(m, b)) {
                uf.union(x, y);
            }
        }
    }
    let mut label: HashMap<usize, usize> = HashMap::new();
    let mut classes = Vec::new();
    let mut cover_class = vec![Vec::new(); n];
    for a in 0..n {
        for (k, &c) in l.up[a].iter().enumerate() {
            let root = uf.find(offset[a] + k);
            let next = label.len();
            let cid = *label.entry(root).or_insert_with(|| {
                classes.push(IntervalClass { class_id: next, representative: (a, c) });
                next
            });
            cover_class[a].push(cid);
        }
    }
    IntervalClasses { cover_class, classes }
}

/// First `y ∈ [lo, hi]` with `x ∧ y = lo` and `x ∨ y = hi`.
pub fn complement_exists(l: &FinLattice, x: Elem, lo: Elem, hi: Elem) -> Option<Elem> {
    (0..l.len()).find(|&y| l.leq(lo, y) && l.leq(y, hi) && l.meet(x, y) == lo && l.join(x, y) == hi)
}

/// Whether `[lo, hi]` is a complemented lattice.
///
/// For modular lattices of finite length this holds iff `hi` is the join of
/// the atoms of the interval.
pub fn is_complemented_interval(l: &FinLattice, lo: Elem, hi: Elem) -> bool {
    if lo == hi {
        return true;
    }
    let socle = l.join_all(l.up[lo].iter().copied().filter(|&c| l.leq(c, hi)).chain([lo]));
    socle == hi
}

/// Definition-level complementedness check by enumeration.
pub fn is_complemented_interval_brute(l: &FinLattice, lo: Elem, hi: Elem) -> bool {
    l.interval(lo, hi).into_iter().all(|x| complement_exists(l, x, lo, hi).is_some())
}

/// Join of the atoms of `[lo, hi]`.
pub fn socle(l: &FinLattice, lo: Elem, hi: Elem) -> Elem {
    l.join_all(l.up[lo].iter().copied().filter(|&c| l.leq(c, hi)).chain([lo]))
}

/// Values `v([0, x])` of an additive function given on interval classes.
pub fn valuation<T: Clone>(
    l: &FinLattice,
    classes: &IntervalClasses,
    weights: &[T],
    zero: T,
    add: impl Fn(&T, &T) -> T,
) -> Vec<T> {
    let n = l.len();
    let mut val: Vec<Option<T>> = vec![None; n];
    val[l.bottom] = Some(zero);
    let mut order: Vec<Elem> = (0..n).collect();
    order.sort_by_key(|&e| l.height[e]);
    for a in order {
        let va = val[a].clone().expect("reachable from bottom");
        for (k, &c) in l.up[a].iter().enumerate() {
            if val[c].is_none() {
                val[c] = Some(add(&va, &weights[classes.cover_class[a][k]]));
            }
        }
    }
    val.into_iter().map(|v| v.expect("every element lies above the bottom")).collect()
}

/// Rational valuation from class weights.
pub fn x_valuation(l: &FinLattice, classes: &IntervalClasses, weights: &[Q]) -> Vec<Q> {
    valuation(l, classes, weights, Q::from_integer(0.into()), |a, b| a + b)
}

/// Complex valuation from class values.
pub fn z_valuation(l: &FinLattice, classes: &IntervalClasses, weights: &[Gauss]) -> Vec<Gauss> {
    valuation(l, classes, weights, Gauss::zero(), |a, b| a + b)
}

/// A lattice with a positive additive length `X`, stored as `X([0, x])`.
#[derive(Clone, Debug)]
pub struct WeightedLattice {
    pub lattice: FinLattice,
    pub x: Vec<Q>,
}

impl WeightedLattice {
    /// `X` from positive class weights.
    pub fn from_classes(lattice: FinLattice, weights: &[Q]) -> Result<WeightedLattice> {
        let classes = interval_classes(&lattice);
        if weights.len() != classes.len() {
            return Err(Error::Invalid(format!(
                "{} class weights given, lattice has {} classes",
                weights.len(),
                classes.len()
            )));
        }
        if weights.iter().any(|w| *w <= Q::from_integer(0.into())) {
            return Err(Error::Invalid("class weights must be positive".into()));
        }
        let x = x_valuation(&lattice, &classes, weights);
        Ok(WeightedLattice { lattice, x })
    }

    /// `X` counting every cover with weight one.
    pub fn unit(lattice: FinLattice) -> WeightedLattice {
        let x = (0..lattice.len()).map(|e| Q::from_integer((lattice.height(e) as i64).into())).collect();
        WeightedLattice { lattice, x }
    }

    pub fn x_interval(&self, lo: Elem, hi: Elem) -> Q {
        &self.x[hi] - &self.x[lo]
    }

    /// Smallest `X` value of a covering interval.
    pub fn x_min(&self) -> Q {
        let l = &self.lattice;
        (0..l.len())
            .flat_map(|a| l.up[a].iter().map(move |&c| (a, c)))
            .map(|(a, c)| self.x_interval(a, c))
            .min()
            .unwrap_or_else(|| Q::from_integer(1.into()))
    }
}
