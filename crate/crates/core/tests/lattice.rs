mod common;

use itlog_core::dag::subgraph_lattice;
use itlog_core::io::{from_json, LatticeDoc};
use itlog_core::lattice::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Maximal chain in `[lo, hi]` grown by picking random upper covers.
fn random_chain_length(l: &FinLattice, lo: Elem, hi: Elem, rng: &mut ChaCha8Rng) -> usize {
    let mut cur = lo;
    let mut len = 0;
    while cur != hi {
        let next: Vec<Elem> = l.upper_covers(cur).iter().copied().filter(|&c| l.leq(c, hi)).collect();
        cur = next[rng.gen_range(0..next.len())];
        len += 1;
    }
    len
}

/// Perspectivity classes by brute force: repeat until no merge happens.
fn classes_brute(l: &FinLattice) -> Vec<Vec<(Elem, Elem)>> {
    let covers: Vec<(Elem, Elem)> =
        (0..l.len()).flat_map(|a| l.upper_covers(a).iter().map(move |&b| (a, b))).collect();
    let mut class: Vec<usize> = (0..covers.len()).collect();
    let idx = |p: (Elem, Elem)| covers.iter().position(|&c| c == p);
    loop {
        let mut changed = false;
        for a in 0..l.len() {
            for b in 0..l.len() {
                let (j, m) = (l.join(a, b), l.meet(a, b));
                if let (Some(i1), Some(i2)) = (idx((a, j)), idx((m, b))) {
                    let c = class[i1].min(class[i2]);
                    if class[i1] != c || class[i2] != c {
                        let (o1, o2) = (class[i1], class[i2]);
                        for x in class.iter_mut() {
                            if *x == o1 || *x == o2 {
                                *x = c;
                            }
                        }
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut ids: Vec<usize> = class.clone();
    ids.sort();
    ids.dedup();
    ids.iter().map(|&c| (0..covers.len()).filter(|&k| class[k] == c).map(|k| covers[k]).collect()).collect()
}

#[test]
fn pentagon_builds_but_is_not_modular() {
    let n5 = FinLattice::pentagon();
    assert_eq!(n5.len(), 5);
    assert!(check_modular(&n5).is_some());
}

#[test]
fn json_load_takes_closure() {
    let doc: LatticeDoc = from_json(r#"{"elements":["0","a","1"],"leq":[["0","a"],["a","1"]]}"#).unwrap();
    let l = doc.to_lattice().unwrap();
    assert!(l.leq(0, 2));
    assert_eq!(l.join(0, 1), 1);
}

#[test]
fn closed_subgraph_lattices_of_figure_graphs() {
    use itlog_core::dag::Dag;
    let plain = subgraph_lattice(&Dag::unit(3, &[(0, 1), (1, 2)]).unwrap()).unwrap();
    let composite = subgraph_lattice(&Dag::unit(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()).unwrap();
    assert_eq!(plain.lattice.names(), composite.lattice.names());
    for a in 0..4 {
        for b in 0..4 {
            assert_eq!(plain.lattice.leq(a, b), composite.lattice.leq(a, b));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn maximal_chains_have_equal_length(l in common::lattice_strategy(), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for lo in 0..l.len() {
            for hi in 0..l.len() {
                if l.leq(lo, hi) {
                    let n = jh_length(&l, lo, hi).unwrap();
                    for _ in 0..3 {
                        prop_assert_eq!(random_chain_length(&l, lo, hi, &mut rng), n);
                    }
                }
            }
        }
    }

    #[test]
    fn classes_match_brute_force(l in common::lattice_strategy()) {
        let cl = interval_classes(&l);
        let brute = classes_brute(&l);
        prop_assert_eq!(cl.len(), brute.len());
        for group in &brute {
            let id = cl.class_of(&l, group[0].0, group[0].1);
            prop_assert!(group.iter().all(|&(a, b)| cl.class_of(&l, a, b) == id));
        }
    }

    #[test]
    fn classes_invariant_under_relabeling((l, perm) in common::permuted_lattice_strategy()) {
        let p = l.permuted(&perm);
        let (c1, c2) = (interval_classes(&l), interval_classes(&p));
        prop_assert_eq!(c1.len(), c2.len());
        // Same partition of covers, transported along the relabeling.
        let mut inv = vec![0; perm.len()];
        for (i, &x) in perm.iter().enumerate() { inv[x] = i; }
        for a in 0..l.len() {
            for &b in l.upper_covers(a) {
                for c in 0..l.len() {
                    for &d in l.upper_covers(c) {
                        let same1 = c1.class_of(&l, a, b) == c1.class_of(&l, c, d);
                        let same2 = c2.class_of(&p, inv[a], inv[b]) == c2.class_of(&p, inv[c], inv[d]);
                        prop_assert_eq!(same1, same2);
                    }
                }
            }
        }
    }

    #[test]
    fn complement_relation_is_symmetric(l in common::lattice_strategy()) {
        for lo in 0..l.len() {
            for hi in l.interval(lo, l.top()) {
                for x in l.interval(lo, hi) {
                    if let Some(y) = complement_exists(&l, x, lo, hi) {
                        prop_assert!(complement_exists(&l, y, lo, hi).is_some());
                    }
                }
                prop_assert_eq!(is_complemented_interval(&l, lo, hi), is_complemented_interval_brute(&l, lo, hi));
            }
        }
    }

    #[test]
    fn subgraph_lattices_are_distributive(g in common::dag_strategy(6)) {
        let l = subgraph_lattice(&g).unwrap().lattice;
        prop_assert!(check_modular(&l).is_none());
        for x in 0..l.len() {
            for y in 0..l.len() {
                for z in 0..l.len() {
                    prop_assert_eq!(l.meet(x, l.join(y, z)), l.join(l.meet(x, y), l.meet(x, z)));
                }
            }
        }
    }
}
