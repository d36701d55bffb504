mod common;

use std::collections::BTreeSet;

use common::*;
use sramsey::constructions::{make_chain, make_graph, make_set, GraphSpec};
use sramsey::ramsey::{
    check_arrow, degree_evidence, minimal_d, two_degrees_check, validate_witness, ArrowQuery, Coloring, Mode, Outcome,
    RamseyError, SearchOptions,
};
use sramsey::{FiniteStructure, Limits};

/// Whether some r-coloring of the copies (or embeddings) of `a` in `c` gives
/// every copy of `b` more than `d` colors, by trying all colorings.
fn brute_arrow_fails(c: &FiniteStructure, b: &FiniteStructure, a: &FiniteStructure, r: usize, d: usize, mode: Mode) -> bool {
    let items: Vec<Vec<usize>> = match mode {
        Mode::Embedding => brute_embeddings(a, c),
        Mode::Substructure => brute_embeddings(a, c)
            .into_iter()
            .map(|mut e| {
                e.sort();
                e
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    };
    let inner = brute_embeddings(a, b);
    let blocks: Vec<BTreeSet<usize>> = brute_embeddings(b, c)
        .into_iter()
        .map(|h| {
            inner
                .iter()
                .map(|j| {
                    let mut hj: Vec<usize> = j.iter().map(|&x| h[x]).collect();
                    if mode == Mode::Substructure {
                        hj.sort();
                    }
                    items.iter().position(|e| *e == hj).unwrap()
                })
                .collect()
        })
        .collect();
    if blocks.is_empty() {
        return false;
    }
    all_tuples(r, items.len())
        .iter()
        .any(|col| blocks.iter().all(|blk| blk.iter().map(|&i| col[i]).collect::<BTreeSet<_>>().len() > d))
}

#[test]
fn search_matches_brute_force_on_small_instances() {
    let opts = SearchOptions::default();
    let graphs = [
        make_graph(&GraphSpec::complete(4)),
        make_graph(&GraphSpec::path(4)),
        make_graph(&GraphSpec::new(4, [(0, 1), (1, 2), (2, 0), (2, 3)]).unwrap()),
    ];
    let smalls = [make_graph(&GraphSpec::discrete(1)), make_graph(&GraphSpec::complete(2)), make_graph(&GraphSpec::discrete(2))];
    let bigs = [make_graph(&GraphSpec::complete(3)), make_graph(&GraphSpec::path(3)), make_graph(&GraphSpec::complete(2))];
    let mut checked = 0;
    for c in &graphs {
        for b in &bigs {
            for a in &smalls {
                for mode in [Mode::Substructure, Mode::Embedding] {
                    for d in 1..=2 {
                        let q = ArrowQuery { host: c, big: b, small: a, r: 2, d, mode };
                        let Ok(v) = check_arrow(&q, &opts) else { continue };
                        if v.outcome == Outcome::Degenerate {
                            continue;
                        }
                        let fails = brute_arrow_fails(c, b, a, 2, d, mode);
                        assert_eq!(v.outcome == Outcome::Fails, fails);
                        if let Some(w) = &v.witness {
                            assert!(validate_witness(&q, w, &opts.limits).unwrap());
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 20);
}

#[test]
fn exhaustive_mode_agrees_with_pruned_search() {
    let base = SearchOptions::default();
    let exhaustive = SearchOptions { exhaustive: true, ..SearchOptions::default() };
    for n in 3..=6 {
        let (c, b, a) = (make_chain(n), make_chain(3), make_chain(2));
        let q = ArrowQuery { host: &c, big: &b, small: &a, r: 2, d: 1, mode: Mode::Substructure };
        assert_eq!(check_arrow(&q, &base).unwrap().outcome, check_arrow(&q, &exhaustive).unwrap().outcome, "n = {n}");
    }
    let (c, b, a) = (make_chain(7), make_chain(3), make_chain(2));
    let q = ArrowQuery { host: &c, big: &b, small: &a, r: 2, d: 1, mode: Mode::Substructure };
    assert!(matches!(check_arrow(&q, &exhaustive), Err(RamseyError::DomainTooLarge { size: 21, max: 20 })));
}

#[test]
fn monotone_in_d_and_r() {
    let opts = SearchOptions::default();
    let (c, b, a) = (make_graph(&GraphSpec::complete(5)), make_graph(&GraphSpec::complete(3)), make_graph(&GraphSpec::complete(2)));
    for r in 2..=3 {
        let (min, sweep) = minimal_d(&c, &b, &a, r, Mode::Substructure, &opts).unwrap();
        let min = min.unwrap();
        assert_eq!(sweep.len(), min);
        for d in 1..=r {
            let holds = check_arrow(&ArrowQuery { host: &c, big: &b, small: &a, r, d, mode: Mode::Substructure }, &opts).unwrap().holds();
            assert_eq!(holds, d >= min, "r = {r}, d = {d}");
        }
    }
}

#[test]
fn bad_inputs() {
    let opts = SearchOptions::default();
    let (c, a) = (make_chain(3), make_chain(2));
    let q = ArrowQuery { host: &c, big: &a, small: &a, r: 1, d: 1, mode: Mode::Substructure };
    assert!(matches!(check_arrow(&q, &opts), Err(RamseyError::BadParameters { .. })));
    let s = make_set(3);
    let q = ArrowQuery { host: &s, big: &a, small: &a, r: 2, d: 1, mode: Mode::Substructure };
    assert!(check_arrow(&q, &opts).is_err());
    let q = ArrowQuery { host: &c, big: &c, small: &a, r: 2, d: 1, mode: Mode::Embedding };
    let wrong = Coloring { mode: Mode::Substructure, domain: vec![], colors: vec![] };
    assert!(validate_witness(&q, &wrong, &Limits::default()).is_err());
}

#[test]
fn degree_evidence_on_chain_pool() {
    let opts = SearchOptions::default();
    let pool: Vec<FiniteStructure> = (4..=6).map(make_chain).collect();
    let report = degree_evidence(&make_chain(2), &[make_chain(3)], &pool, 2, Mode::Substructure, &opts);
    assert_eq!(report.cells.len(), 1);
    assert_eq!(report.cells[0].min_d, Some(1));
    assert_eq!(report.cells[0].host, Some(2));
    assert_eq!(report.pool_bound, Some(1));
}

#[test]
fn two_degrees_on_edges() {
    let opts = SearchOptions::default();
    let r = two_degrees_check(
        &make_graph(&GraphSpec::complete(2)),
        &make_graph(&GraphSpec::complete(3)),
        &make_graph(&GraphSpec::complete(6)),
        2,
        &opts,
    )
    .unwrap();
    assert_eq!((r.d_sub, r.d_emb, r.aut_order), (Some(1), Some(2), 2));
    assert!(r.consistent);
}
