mod common;

use std::collections::BTreeMap;

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sramsey::constructions::{make_chain, make_graph, make_set, GraphSpec};
use sramsey::indiscernibles::{
    atomic_locally_based_check, noorder_family, qf_indiscernible_check, FamilyDoc, IndexedFamily, IndiscernibleCheck,
    LocalBasedCheck,
};
use sramsey::structures::qftp_fingerprint;
use sramsey::{FiniteStructure, Limits};

fn concat(f: &IndexedFamily, idx: &[usize]) -> Vec<usize> {
    idx.iter().flat_map(|&i| f.tuples[i].iter().copied()).collect()
}

/// Every atomic fact `R(positions)` or `x_p = x_q` about a host tuple.
fn atomic_facts(m: &FiniteStructure, t: &[usize]) -> Vec<bool> {
    let mut out = Vec::new();
    for (ri, r) in m.signature().relations().iter().enumerate() {
        for pos in all_tuples(t.len(), r.arity) {
            let args: Vec<usize> = pos.iter().map(|&p| t[p]).collect();
            out.push(m.holds(ri, &args));
        }
    }
    for p in 0..t.len() {
        for q in 0..t.len() {
            out.push(t[p] == t[q]);
        }
    }
    out
}

#[test]
fn unordered_pairs_in_a_chain() {
    let l = Limits::default();
    let r = qf_indiscernible_check(&noorder_family(4), 2, &l).unwrap();
    assert_eq!(r, IndiscernibleCheck::Counterexample { left: vec![0, 1], right: vec![1, 0] });
    // Already on one-element tuples the family is fine.
    assert!(qf_indiscernible_check(&noorder_family(4), 1, &l).unwrap().passed());
}

#[test]
fn local_basedness_examples() {
    let l = Limits::default();
    let x = IndexedFamily::new(make_chain(3), make_chain(5), 1, vec![vec![0], vec![2], vec![4]]).unwrap();
    assert!(atomic_locally_based_check(&x, &x, 3, &l).unwrap().passed());
    let y = IndexedFamily::new(make_chain(3), make_chain(5), 1, vec![vec![1], vec![2], vec![3]]).unwrap();
    assert!(atomic_locally_based_check(&x, &y, 3, &l).unwrap().passed());
    let reversed = IndexedFamily::new(make_chain(3), make_chain(5), 1, vec![vec![4], vec![2], vec![0]]).unwrap();
    assert_eq!(atomic_locally_based_check(&x, &reversed, 2, &l).unwrap(), LocalBasedCheck::Counterexample { tuple: vec![0, 1] });
    // Re-indexing by an automorphism of an unordered index.
    let g = make_graph(&GraphSpec::new(4, [(0, 1), (2, 3)]).unwrap());
    let x = IndexedFamily::new(make_set(3), g.clone(), 2, vec![vec![0, 1], vec![2, 3], vec![1, 0]]).unwrap();
    let y = IndexedFamily::new(make_set(3), g, 2, vec![vec![2, 3], vec![1, 0], vec![0, 1]]).unwrap();
    assert!(atomic_locally_based_check(&x, &y, 2, &l).unwrap().passed());
}

#[test]
fn mismatched_families_rejected() {
    let l = Limits::default();
    let x = IndexedFamily::new(make_chain(2), make_chain(2), 1, vec![vec![0], vec![1]]).unwrap();
    let y = IndexedFamily::new(make_set(2), make_chain(2), 1, vec![vec![0], vec![1]]).unwrap();
    assert!(atomic_locally_based_check(&x, &y, 2, &l).is_err());
    let z = IndexedFamily::new(make_chain(2), make_chain(2), 2, vec![vec![0, 1], vec![1, 0]]).unwrap();
    assert!(atomic_locally_based_check(&x, &z, 2, &l).is_err());
}

#[test]
fn rule_form_on_random_families() {
    let l = Limits::default();
    let mut rng = StdRng::seed_from_u64(17);
    let mut passing = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=4);
        let index = if rng.gen_bool(0.5) { make_chain(n) } else { make_set(n) };
        let edges: Vec<(usize, usize)> =
            sramsey::tuples::combinations(5, 2).into_iter().filter(|_| rng.gen_bool(0.5)).map(|p| (p[0], p[1])).collect();
        let host = make_graph(&GraphSpec::new(5, edges).unwrap());
        let fam = |rng: &mut StdRng| {
            let tuples = (0..n).map(|_| vec![rng.gen_range(0..5)]).collect();
            IndexedFamily::new(index.clone(), host.clone(), 1, tuples).unwrap()
        };
        let (x, y) = (fam(&mut rng), fam(&mut rng));
        if !atomic_locally_based_check(&x, &y, 2, &l).unwrap().passed() {
            continue;
        }
        passing += 1;
        // For each index class, facts constant on X's tuples hold on Y's tuples.
        let mut classes: BTreeMap<Vec<u8>, (Vec<Option<bool>>, Vec<Vec<usize>>)> = BTreeMap::new();
        for len in 1..=2 {
            for t in all_tuples(n, len) {
                let key = qftp_fingerprint(&index, &t, &l).unwrap().to_bytes();
                let facts = atomic_facts(&x.host, &concat(&x, &t));
                let entry = classes.entry(key).or_insert_with(|| (facts.iter().map(|&b| Some(b)).collect(), Vec::new()));
                for (c, f) in entry.0.iter_mut().zip(&facts) {
                    if *c != Some(*f) {
                        *c = None;
                    }
                }
                entry.1.push(t);
            }
        }
        for (constant, members) in classes.values() {
            for t in members {
                let facts = atomic_facts(&y.host, &concat(&y, t));
                for (c, f) in constant.iter().zip(&facts) {
                    if let Some(c) = c {
                        assert_eq!(c, f);
                    }
                }
            }
        }
    }
    assert!(passing > 5, "only {passing} passing instances");
}

#[test]
fn restriction_preserves_indiscernibility() {
    let l = Limits::default();
    let fam = IndexedFamily::new(make_chain(5), make_chain(7), 1, vec![vec![0], vec![1], vec![3], vec![4], vec![6]]).unwrap();
    assert!(qf_indiscernible_check(&fam, 3, &l).unwrap().passed());
    for elems in [vec![0, 2, 4], vec![1, 3], vec![4]] {
        assert!(qf_indiscernible_check(&fam.restrict(&elems).unwrap(), 3, &l).unwrap().passed());
    }
}

#[test]
fn family_documents_round_trip() {
    let fam = noorder_family(3);
    let text = serde_json::to_string(&FamilyDoc::from_family(&fam)).unwrap();
    let back: FamilyDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(back.to_family().unwrap(), fam);
}
