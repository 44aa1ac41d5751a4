//! Polarizations, phases and Harder-Narasimhan filtrations.
//!
//! A polarization is stored as its values `Z([0, x])` on elements, so the
//! value of an interval is a difference. Phases are compared exactly with
//! cross-products; floating-point angles are only produced for display.

use std::cmp::Ordering;

use crate::lattice::{interval_classes, z_valuation, Elem, FinLattice};
use crate::rational::{Gauss, Mass, Q};
use crate::{Error, Result};

/// Class values of a polarization together with a rotation into the default
/// half-plane `(−π/2, π/2]`.
#[derive(Clone, Debug)]
pub struct Polarization {
    pub class_z: Vec<Gauss>,
    /// Multiplier applied to every value before phase comparisons.
    pub rotation: Gauss,
}

impl Polarization {
    pub fn new(class_z: Vec<Gauss>) -> Polarization {
        Polarization { class_z, rotation: Gauss::real(Q::from_integer(1.into())) }
    }

    /// Element values `Z([0, x])` after rotation; checks the half-plane condition.
    pub fn valuation(&self, l: &FinLattice) -> Result<Vec<Gauss>> {
        let classes = interval_classes(l);
        if classes.len() != self.class_z.len() {
            return Err(Error::Invalid(format!(
                "{} class values given, lattice has {} classes",
                self.class_z.len(),
                classes.len()
            )));
        }
        let rotated: Vec<Gauss> = self.class_z.iter().map(|z| z * &self.rotation).collect();
        if let Some(k) = rotated.iter().position(|z| !z.in_half_plane()) {
            return Err(Error::Invalid(format!("class {k} lies outside the half-plane")));
        }
        Ok(z_valuation(l, &classes, &rotated))
    }
}

/// `Z([lo, hi])`.
pub fn z_interval(z: &[Gauss], lo: Elem, hi: Elem) -> Gauss {
    &z[hi] - &z[lo]
}

/// Phase of `[lo, hi]` in radians.
pub fn phase(z: &[Gauss], lo: Elem, hi: Elem) -> Result<f64> {
    if lo == hi {
        return Err(Error::EmptyInterval);
    }
    Ok(z_interval(z, lo, hi).arg())
}

fn semistable_impl(l: &FinLattice, z: &[Gauss], lo: Elem, hi: Elem, strict: bool) -> bool {
    if lo == hi {
        return true;
    }
    let total = z_interval(z, lo, hi);
    l.interval(lo, hi).into_iter().filter(|&x| x != lo && (!strict || x != hi)).all(|x| {
        match z_interval(z, lo, x).cmp_phase(&total) {
            Ordering::Less => true,
            Ordering::Equal => !strict,
            Ordering::Greater => false,
        }
    })
}

/// Whether `[lo, hi]` is semistable: no `[lo, x]` has larger phase.
pub fn is_semistable_interval(l: &FinLattice, z: &[Gauss], lo: Elem, hi: Elem) -> bool {
    semistable_impl(l, z, lo, hi, false)
}

pub fn is_semistable(l: &FinLattice, z: &[Gauss]) -> bool {
    is_semistable_interval(l, z, l.bottom(), l.top())
}

/// Whether every proper `[0, x]` has strictly smaller phase.
pub fn is_stable(l: &FinLattice, z: &[Gauss]) -> bool {
    semistable_impl(l, z, l.bottom(), l.top(), true)
}

/// Harder-Narasimhan filtration: chain and the value of each subquotient.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnFiltration {
    pub chain: Vec<Elem>,
    pub values: Vec<Gauss>,
}

impl HnFiltration {
    pub fn phases(&self) -> Vec<f64> {
        self.values.iter().map(Gauss::arg).collect()
    }

    pub fn mass(&self) -> Mass {
        Mass::from_values(&self.values)
    }
}

/// HN filtration of `[lo, hi]` by repeatedly taking the join of all elements
/// of maximal phase.
pub fn hn_filtration_interval(l: &FinLattice, z: &[Gauss], lo: Elem, hi: Elem) -> HnFiltration {
    let mut chain = vec![lo];
    let mut values = Vec::new();
    let mut cur = lo;
    while cur != hi {
        let mut best: Option<Gauss> = None;
        let mut winners: Vec<Elem> = Vec::new();
        for x in l.interval(cur, hi) {
            if x == cur {
                continue;
            }
            let v = z_interval(z, cur, x);
            match best.as_ref().map(|b| v.cmp_phase(b)) {
                None | Some(Ordering::Greater) => {
                    best = Some(v);
                    winners.clear();
                    winners.push(x);
                }
                Some(Ordering::Equal) => winners.push(x),
                Some(Ordering::Less) => {}
            }
        }
        let next = winners.into_iter().fold(cur, |a, b| l.join(a, b));
        debug_assert!(is_semistable_interval(l, z, cur, next));
        values.push(z_interval(z, cur, next));
        chain.push(next);
        cur = next;
    }
    debug_assert!(values.windows(2).all(|w| w[0].cmp_phase(&w[1]) == Ordering::Greater));
    HnFiltration { chain, values }
}

pub fn hn_filtration(l: &FinLattice, z: &[Gauss]) -> HnFiltration {
    hn_filtration_interval(l, z, l.bottom(), l.top())
}

/// Sum of `|Z|` over the HN subquotients.
pub fn mass(l: &FinLattice, z: &[Gauss]) -> Mass {
    hn_filtration(l, z).mass()
}

pub fn mass_interval(l: &FinLattice, z: &[Gauss], lo: Elem, hi: Elem) -> Mass {
    hn_filtration_interval(l, z, lo, hi).mass()
}
