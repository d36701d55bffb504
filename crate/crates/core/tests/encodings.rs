mod common;

use std::collections::BTreeSet;

use common::*;
use sramsey::boolalg::{enumerate_ba_embeddings, AtomSetAlgebra};
use sramsey::constructions::{encode_graph_to_ba, encode_hypergraph_to_ba, make_graph, GraphSpec, HypergraphSpec};
use sramsey::structures::qftp_fingerprint;
use sramsey::Limits;

/// Nonempty cells of a tuple of atom sets, as a set of sign vectors.
fn cells(t: &[u64], atoms: usize) -> BTreeSet<Vec<bool>> {
    (0..atoms).map(|a| t.iter().map(|&x| x >> a & 1 == 1).collect()).collect()
}

#[test]
fn graph_encoding_meets_and_atoms() {
    let l = Limits::default();
    for m in 1..=4 {
        for spec in GraphSpec::all_labeled(m) {
            let enc = encode_graph_to_ba(&spec).unwrap();
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        assert_eq!(enc.g[i] & enc.g[j] != 0, spec.has_edge(i, j));
                    }
                    for k in 0..m {
                        if i != j && j != k && i != k {
                            assert_eq!(enc.g[i] & enc.g[j] & enc.g[k], 0);
                        }
                    }
                }
            }
            let atoms = enc.algebra.subalgebra_atoms(&enc.g);
            assert_eq!(atoms.len(), m + spec.edges.len());
            assert!(atoms.iter().all(|a| a.count_ones() == 1));
            // Cell patterns from the library agree with direct evaluation.
            for t in all_tuples(m, 2) {
                let img: Vec<u64> = t.iter().map(|&v| enc.g[v]).collect();
                let p = enc.algebra.qftp_cells(&img, &l).unwrap();
                let direct = cells(&img, enc.algebra.atom_count());
                for w in 0..4usize {
                    let sv: Vec<bool> = (0..2).map(|i| w >> i & 1 == 1).collect();
                    assert_eq!(p.is_nonempty(w), direct.contains(&sv));
                }
            }
        }
    }
}

#[test]
fn graph_encoding_respects_types_on_four_vertices() {
    let l = Limits::default();
    for spec in GraphSpec::all_labeled(4) {
        let enc = encode_graph_to_ba(&spec).unwrap();
        let g = make_graph(&spec);
        let tuples = all_tuples(4, 3);
        for s in &tuples {
            for t in &tuples {
                let graph_eq = qftp_fingerprint(&g, s, &l).unwrap() == qftp_fingerprint(&g, t, &l).unwrap();
                let is: Vec<u64> = s.iter().map(|&v| enc.g[v]).collect();
                let it: Vec<u64> = t.iter().map(|&v| enc.g[v]).collect();
                let cell_eq = cells(&is, enc.algebra.atom_count()) == cells(&it, enc.algebra.atom_count());
                assert_eq!(graph_eq, cell_eq, "{spec:?} {s:?} {t:?}");
            }
        }
    }
}

#[test]
fn exported_cell_patterns_decide_types() {
    let l = Limits::default();
    let alg = AtomSetAlgebra::with_atoms(3).unwrap();
    let ex = alg.export_structure(&l).unwrap();
    let tuples = all_tuples(8, 2);
    for s in &tuples {
        for t in &tuples {
            let fp = qftp_fingerprint(&ex, s, &l).unwrap() == qftp_fingerprint(&ex, t, &l).unwrap();
            let (s64, t64): (Vec<u64>, Vec<u64>) = (s.iter().map(|&x| x as u64).collect(), t.iter().map(|&x| x as u64).collect());
            let cp = alg.qftp_cells(&s64, &l).unwrap() == alg.qftp_cells(&t64, &l).unwrap();
            assert_eq!(fp, cp, "{s:?} {t:?}");
        }
    }
}

#[test]
fn atom_counts_for_discrete_and_triangle() {
    for m in 1..=5 {
        let enc = encode_graph_to_ba(&GraphSpec::discrete(m)).unwrap();
        assert_eq!(enc.algebra.subalgebra_atoms(&enc.g).len(), m);
    }
    let enc = encode_graph_to_ba(&GraphSpec::complete(3)).unwrap();
    assert_eq!(enc.algebra.subalgebra_atoms(&enc.g).len(), 6);
}

#[test]
fn embeddings_of_algebras_count_surjections() {
    // Surjections from 4 atoms onto 2: 2^4 - 2.
    let (a, b) = (AtomSetAlgebra::with_atoms(2).unwrap(), AtomSetAlgebra::with_atoms(4).unwrap());
    assert_eq!(enumerate_ba_embeddings(&a, &b).len(), 14);
}

fn meet_all(g: &[u64], idx: &[usize]) -> u64 {
    idx.iter().fold(u64::MAX, |acc, &i| acc & g[i])
}

#[test]
fn hypergraph_encoding_examples() {
    let l = Limits::default();
    let spec = HypergraphSpec::new(4, 3, [vec![0, 1, 2]]).unwrap();
    let enc = encode_hypergraph_to_ba(&spec).unwrap();
    for t in sramsey::tuples::combinations(4, 3) {
        assert_eq!(meet_all(&enc.g, &t) != 0, t == [0, 1, 2]);
    }
    for t in sramsey::tuples::combinations(4, 2) {
        assert_ne!(meet_all(&enc.g, &t), 0);
    }
    let empty = encode_hypergraph_to_ba(&HypergraphSpec::new(4, 3, []).unwrap()).unwrap();
    for t in sramsey::tuples::combinations(4, 3) {
        assert_eq!(meet_all(&empty.g, &t), 0);
    }
    let pairs: BTreeSet<_> = all_tuples(4, 2)
        .into_iter()
        .filter(|t| injective(t))
        .map(|t| empty.algebra.qftp_cells(&[empty.g[t[0]], empty.g[t[1]]], &l).unwrap())
        .collect();
    assert_eq!(pairs.len(), 1);
    // Uniformity two behaves like a graph.
    let two = encode_hypergraph_to_ba(&HypergraphSpec::new(3, 2, [vec![0, 2]]).unwrap()).unwrap();
    for t in sramsey::tuples::combinations(3, 2) {
        assert_eq!(meet_all(&two.g, &t) != 0, t == [0, 2]);
    }
}

#[test]
fn hypergraph_specs_are_validated() {
    assert!(HypergraphSpec::new(4, 3, [vec![0, 1]]).is_err());
    assert!(HypergraphSpec::new(4, 3, [vec![0, 1, 4]]).is_err());
    assert!(HypergraphSpec::new(4, 1, []).is_err());
    assert!(encode_hypergraph_to_ba(&HypergraphSpec::new(8, 3, []).unwrap()).is_err());
}
