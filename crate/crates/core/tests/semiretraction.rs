mod common;

use std::sync::Arc;

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use sramsey::constructions::{
    graph_ba_witness, interdefinability_fragments, interleaving_map, make_pred, ordered_graph_indiscernible_fragment,
    treeprop_maps, GraphSpec, Interdefinable,
};
use sramsey::ramsey::{Coloring, Mode};
use sramsey::semiretraction::{
    check_qftp_respecting, phi, preadjunction_check, preadjunction_check_with, restricted_sweep, transfer_pipeline_check,
    verify_semiretraction, CompositionCheck, FiniteMap, QftpCheck, SemiRetractionWitness, TransferSetup, WitnessDoc,
};
use sramsey::structures::qftp_fingerprint;
use sramsey::Limits;

fn swap_f(w: &SemiRetractionWitness, x: usize, y: usize) -> SemiRetractionWitness {
    let mut f = w.f.clone();
    f.swap(x, y);
    SemiRetractionWitness::new(w.a_frag.clone(), w.b_frag.clone(), w.a_host.clone(), w.g.clone(), f, w.depth).unwrap()
}

/// Oracle for qftp-respecting: compare every pair of injective tuples.
fn respecting_by_pairs(w: &SemiRetractionWitness, len: usize) -> bool {
    let (a, b) = (&*w.a_frag, &*w.b_frag);
    let tuples: Vec<Vec<usize>> = all_tuples(a.size(), len).into_iter().filter(|t| injective(t)).collect();
    for s in &tuples {
        for t in &tuples {
            let gs: Vec<usize> = s.iter().map(|&x| w.g[x]).collect();
            let gt: Vec<usize> = t.iter().map(|&x| w.g[x]).collect();
            if same_type(a, s, a, t) && !same_type(b, &gs, b, &gt) {
                return false;
            }
        }
    }
    true
}

#[test]
fn small_fragments_pass() {
    let l = Limits::default();
    let w = treeprop_maps(1, 1, None, &l).unwrap();
    assert!(verify_semiretraction(&w, &l).unwrap().passed());
    for n in [1, 4] {
        let w = ordered_graph_indiscernible_fragment(n, &l).unwrap();
        assert!(verify_semiretraction(&w, &l).unwrap().passed());
    }
    for kind in [Interdefinable::Pred, Interdefinable::SuccReduct] {
        for n in [0, 5] {
            let w = interdefinability_fragments(kind, n, &l).unwrap();
            assert!(verify_semiretraction(&w, &l).unwrap().passed(), "{kind:?} {n}");
        }
    }
}

#[test]
fn ordered_graph_mutation_fails() {
    let l = Limits::default();
    let w = ordered_graph_indiscernible_fragment(4, &l).unwrap();
    let mut g = w.g.clone();
    g.swap(1, 2);
    let bad = SemiRetractionWitness::new(w.a_frag.clone(), w.b_frag.clone(), w.a_host.clone(), g, w.f.clone(), 4).unwrap();
    let rep = verify_semiretraction(&bad, &l).unwrap();
    assert!(!rep.passed());
    assert!(matches!(rep.composition, CompositionCheck::Counterexample { .. }));
}

#[test]
fn treeprop_small_matches_pair_oracle() {
    let l = Limits::default();
    let w = treeprop_maps(2, 2, None, &l).unwrap();
    assert_eq!(w.b_frag.size(), 40);
    assert_eq!(w.a_host.size(), 40);
    for len in 1..=3 {
        let lib = check_qftp_respecting(&w.g_map(), len, &l).unwrap().passed();
        assert_eq!(lib, respecting_by_pairs(&w, len));
    }
    let bad = swap_f(&w, 1, 2);
    let rep = verify_semiretraction(&bad, &Limits::default()).unwrap();
    let QftpCheck::Counterexample { left, right } = rep.f_respecting else { panic!("mutation not caught") };
    let l = Limits::default();
    assert_eq!(qftp_fingerprint(&bad.b_frag, &left, &l).unwrap(), qftp_fingerprint(&bad.b_frag, &right, &l).unwrap());
    let fl: Vec<usize> = left.iter().map(|&x| bad.f[x]).collect();
    let fr: Vec<usize> = right.iter().map(|&x| bad.f[x]).collect();
    assert_ne!(qftp_fingerprint(&bad.a_host, &fl, &l).unwrap(), qftp_fingerprint(&bad.a_host, &fr, &l).unwrap());
}

#[test]
fn treeprop_sizing_errors() {
    let l = Limits::default();
    assert!(treeprop_maps(2, 2, Some(2), &l).is_err());
    assert!(treeprop_maps(3, 2, None, &l).is_err());
}

#[test]
fn interleaving_is_not_respecting() {
    let g = interleaving_map(3).unwrap();
    let rep = check_qftp_respecting(&g, 2, &Limits::default()).unwrap();
    assert!(matches!(rep, QftpCheck::Counterexample { .. }));
}

#[test]
fn pred_without_fixed_zero_changes_one_types() {
    let l = Limits::default();
    let count = |fixed| {
        let m = make_pred(4, fixed);
        let mut fps: Vec<Vec<u8>> = (0..5).map(|x| qftp_fingerprint(&m, &[x], &l).unwrap().to_bytes()).collect();
        fps.sort();
        fps.dedup();
        fps.len()
    };
    assert_eq!(count(true), 5);
    assert_eq!(count(false), 1);
}

#[test]
fn witness_documents_round_trip() {
    let l = Limits::default();
    let w = treeprop_maps(1, 2, None, &l).unwrap();
    let text = serde_json::to_string(&WitnessDoc::from_witness(&w)).unwrap();
    let back: WitnessDoc = serde_json::from_str(&text).unwrap();
    let w2 = back.to_witness().unwrap();
    assert_eq!((w2.g.clone(), w2.f.clone()), (w.g.clone(), w.f.clone()));
    assert_eq!(*w2.a_host, *w.a_host);
    let w = ordered_graph_indiscernible_fragment(3, &l).unwrap();
    assert!(WitnessDoc::from_witness(&w).a_host.is_none());
}

#[test]
fn restricted_sweep_on_treeprop() {
    let l = Limits::default();
    let w = treeprop_maps(2, 2, None, &l).unwrap();
    let sweep = restricted_sweep(&w, 2, 2, &l).unwrap();
    assert!(sweep.failure.is_none(), "{:?}", sweep.failure);
    assert!(sweep.checks > 0);
}

fn random_coloring(domain: Vec<Vec<usize>>, r: usize, seed: u64) -> Coloring {
    let mut rng = StdRng::seed_from_u64(seed);
    let colors = domain.iter().map(|_| rng.gen_range(0..r)).collect();
    Coloring { mode: Mode::Embedding, domain, colors }
}

#[test]
fn transfer_identity_on_ordered_graph_fragment() {
    let l = Limits::default();
    let w = ordered_graph_indiscernible_fragment(4, &l).unwrap();
    let setup = TransferSetup::new(&w, &[0, 1], &[0, 1, 2]).unwrap();
    for seed in 0..3 {
        let c = random_coloring(setup.source_domain(&w, &l).unwrap(), 3, seed);
        let rep = transfer_pipeline_check(&w, &setup, &c, None, &l).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.identities, 3);
    }
}

#[test]
fn transfer_identity_on_graph_fragment() {
    let l = Limits::default();
    let w = graph_ba_witness(&GraphSpec::path(3), 3, &l).unwrap();
    assert!(verify_semiretraction(&w, &l).unwrap().passed());
    let setup = TransferSetup::new(&w, &[0, 1], &[0, 1, 2]).unwrap();
    let c = random_coloring(setup.source_domain(&w, &l).unwrap(), 2, 7);
    let rep = transfer_pipeline_check(&w, &setup, &c, None, &l).unwrap();
    assert!(rep.passed(), "{rep:?}");
    assert_eq!(rep.identities, 4);
}

#[test]
fn transfer_rejects_bad_inputs() {
    let l = Limits::default();
    let w = interdefinability_fragments(Interdefinable::Pred, 3, &l).unwrap();
    // {2} alone is not closed under p.
    assert!(TransferSetup::new(&w, &[2], &[0, 1, 2]).is_err());
    assert!(TransferSetup::new(&w, &[0, 0], &[0, 1]).is_err());
}

#[test]
fn preadjunction_identity_and_mutation() {
    let l = Limits::default();
    let w = ordered_graph_indiscernible_fragment(3, &l).unwrap();
    let rep = preadjunction_check(&w, 2, &l).unwrap();
    assert!(rep.failure.is_none());
    assert!(rep.identities > 0);
    // Shifting every value of Φ breaks the identity.
    let broken = |w: &SemiRetractionWitness, a: &[usize], psi: &FiniteMap| {
        let m = phi(w, a, psi)?;
        Some(m.into_iter().map(|(x, y)| (x, (y + 1) % w.a_host.size())).collect())
    };
    let rep = preadjunction_check_with(&w, 2, &l, broken).unwrap();
    assert!(rep.failure.is_some());
}

#[test]
fn witness_validation() {
    let l = Limits::default();
    let w = ordered_graph_indiscernible_fragment(3, &l).unwrap();
    let bad = SemiRetractionWitness::new(w.a_frag.clone(), w.b_frag.clone(), w.a_host.clone(), vec![0, 0, 1], w.f.clone(), 2);
    assert!(bad.is_err());
    let other = Arc::new(sramsey::constructions::make_set(3));
    assert!(SemiRetractionWitness::new(w.a_frag.clone(), w.b_frag.clone(), other, w.g.clone(), w.f.clone(), 2).is_err());
}
