#![allow(dead_code)]

use itlog_core::dag::Dag;
use itlog_core::rational::q;
use proptest::prelude::*;

/// Random DAG on `n` vertices: edges only go from lower to higher index.
pub fn dag_strategy(max_n: usize) -> impl Strategy<Value = Dag> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (proptest::collection::vec(1i64..6, n), proptest::collection::vec(0u8..3, pairs)).prop_map(
            move |(masses, flags)| {
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in i + 1..n {
                        if flags[k] == 0 {
                            edges.push((i, j));
                        }
                        k += 1;
                    }
                }
                Dag::with_masses(masses.into_iter().map(q).collect(), &edges).unwrap()
            },
        )
    })
}

use itlog_core::dag::subgraph_lattice;
use itlog_core::lattice::FinLattice;

/// Small random modular lattices: distributive ones from DAGs, and
/// non-distributive ones built from diamonds.
pub fn lattice_strategy() -> impl Strategy<Value = FinLattice> {
    prop_oneof![
        dag_strategy(4).prop_map(|g| subgraph_lattice(&g).unwrap().lattice),
        (2usize..5).prop_map(FinLattice::diamond),
        (2usize..4, 1usize..3).prop_map(|(k, n)| FinLattice::glue(&FinLattice::diamond(k), &FinLattice::chain(n))),
        (1usize..3, 2usize..4).prop_map(|(n, k)| FinLattice::glue(&FinLattice::chain(n), &FinLattice::diamond(k))),
        (1usize..3).prop_map(|n| FinLattice::product(&FinLattice::chain(n), &FinLattice::diamond(3))),
    ]
}

/// A lattice together with a random relabeling of its elements.
pub fn permuted_lattice_strategy() -> impl Strategy<Value = (FinLattice, Vec<usize>)> {
    lattice_strategy().prop_flat_map(|l| {
        let perm: Vec<usize> = (0..l.len()).collect();
        (Just(l), Just(perm).prop_shuffle())
    })
}
