#![allow(dead_code)]

use itlog_core::dag::Dag;
use itlog_core::rational::{q, qf};
use itlog_flow::staralg::{Ambient, BElem, MElem, Mat, Quadruple};
use nalgebra::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mat(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| Complex::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)))
}

/// Random quiver with 2–3 vertices of dimension 1–2 and 1–3 arrows.
pub fn random_ambient(r: &mut ChaCha8Rng, equal_dims: Option<usize>) -> Ambient {
    let n = r.gen_range(2..=3);
    let dims: Vec<usize> = (0..n).map(|_| equal_dims.unwrap_or_else(|| r.gen_range(1..=2))).collect();
    let masses: Vec<f64> = (0..n).map(|_| r.gen_range(1..=3) as f64).collect();
    let k = r.gen_range(1..=3);
    let arrows = (0..k)
        .map(|_| {
            let s = r.gen_range(0..n);
            let d = (s + r.gen_range(1..n)) % n;
            (s, d)
        })
        .collect();
    Ambient::new((1..=n).map(|i| i.to_string()).collect(), dims, masses, arrows).unwrap()
}

pub fn random_b(r: &mut ChaCha8Rng, amb: &Ambient) -> BElem {
    BElem(amb.dims.iter().map(|&d| random_mat(r, d, d)).collect())
}

pub fn random_hermitian(r: &mut ChaCha8Rng, amb: &Ambient) -> BElem {
    random_b(r, amb).hermitian_part()
}

/// Random positive definite metric with eigenvalues in about [0.2, 5].
pub fn random_metric(r: &mut ChaCha8Rng, amb: &Ambient) -> BElem {
    let a = random_b(r, amb);
    a.adjoint().mul(&a).add(&amb.b_identity().scale_re(0.2))
}

pub fn random_m(r: &mut ChaCha8Rng, amb: &Ambient) -> MElem {
    MElem(amb.arrows.iter().map(|&(s, d)| random_mat(r, amb.dims[d], amb.dims[s])).collect())
}

/// Random quadruple; θ is random with τ(ρ) = 0 when `theta` is set.
pub fn random_quadruple(seed: u64, theta: bool) -> Quadruple {
    let mut r = rng(seed);
    let amb = random_ambient(&mut r, None);
    let phi = random_m(&mut r, &amb);
    let mut th: Vec<f64> = (0..amb.n_blocks()).map(|_| if theta { r.gen_range(-1.0..1.0) } else { 0.0 }).collect();
    let total: f64 = th.iter().zip(&amb.dims).map(|(t, &d)| t * d as f64).sum();
    let last = amb.n_blocks() - 1;
    th[last] -= total / amb.dims[last] as f64;
    Quadruple::from_quiver(amb, &th, phi).unwrap()
}

/// Arrows that are scaled unitaries between equal-dimensional blocks, so
/// [φ*, φ] is central.
pub fn central_phi(seed: u64) -> (Ambient, MElem) {
    let mut r = rng(seed);
    let d = r.gen_range(1..=2);
    let amb = random_ambient(&mut r, Some(d));
    let phi = MElem(
        amb.arrows
            .iter()
            .map(|_| {
                let qr = random_mat(&mut r, d, d).qr();
                qr.q() * Complex::new(r.gen_range(0.3..1.5), 0.0)
            })
            .collect(),
    );
    (amb, phi)
}

/// Random DAG on up to `max_n` vertices with masses 1–5 and random rational
/// flow constants.
pub fn dag_strategy(max_n: usize, unit_masses: bool) -> impl Strategy<Value = Dag> {
    (1..=max_n).prop_flat_map(move |n| {
        let pairs = n * (n - 1) / 2;
        (
            proptest::collection::vec(1i64..6, n),
            proptest::collection::vec(0u8..3, pairs),
            proptest::collection::vec(1i64..20, pairs),
        )
            .prop_map(move |(masses, flags, cs)| {
                let mut edges = Vec::new();
                let mut consts = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if flags[k] == 0 {
                            edges.push((i, j));
                            consts.push(qf(cs[k], 10));
                        }
                        k += 1;
                    }
                }
                let m = if unit_masses { vec![q(1); n] } else { masses.into_iter().map(q).collect() };
                let mut g = Dag::with_masses(m, &edges).unwrap();
                for (e, c) in g.edges.iter_mut().zip(consts) {
                    e.c = c;
                }
                g
            })
    })
}
