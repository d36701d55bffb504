//! Finite first-order structures, quantifier-free types, embeddings.

mod doc;
mod embedding;
mod fingerprint;
mod signature;
mod structure;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub use doc::{SignatureDoc, StructureDoc};
pub use embedding::{
    count_embeddings, enumerate_copies, enumerate_embeddings, extend_partial, generating_sequence, is_embedding,
    isomorphic, Embedding,
};
pub use fingerprint::{qftp_fingerprint, FingerprintScratch, QfFingerprint};
pub(crate) use fingerprint::check_tuple;
pub use signature::{Signature, Symbol};
pub use structure::{FiniteStructure, StructureBuilder};

use crate::limits::Limits;
use crate::tuples::combinations;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("symbol `{name}` has arity {arity}, above the limit {max}")]
    ArityTooLarge { name: String, arity: usize, max: usize },
    #[error("relation `{0}` has arity 0")]
    ZeroArityRelation(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("element {element} outside universe of size {size}")]
    ElementOutOfRange { element: usize, size: usize },
    #[error("`{name}` expects {expected} arguments, got {got}")]
    WrongArity { name: String, expected: usize, got: usize },
    #[error("function `{name}` is not defined everywhere")]
    FunctionNotTotal { name: String },
    #[error("function `{name}` given two values at {args:?}")]
    FunctionConflict { name: String, args: Vec<usize> },
    #[error("element set not closed under `{function}`")]
    NotClosed { function: String },
    #[error("tuple of length {len} exceeds the bound {max}")]
    TupleTooLong { len: usize, max: usize },
    #[error("universe of size {size} exceeds the bound {max}")]
    UniverseTooLarge { size: usize, max: usize },
    #[error("structures have different signatures")]
    SignatureMismatch,
    #[error("candidate budget of {0} exceeded")]
    Budget(usize),
    #[error("invalid document: {0}")]
    Document(String),
}

/// The substructure generated by `gens`, relabeled in discovery order, with
/// its inclusion into `m`.
pub fn generated_substructure(
    m: &FiniteStructure,
    gens: &[usize],
) -> Result<(FiniteStructure, Embedding), StructureError> {
    if let Some(&bad) = gens.iter().find(|&&x| x >= m.size()) {
        return Err(StructureError::ElementOutOfRange { element: bad, size: m.size() });
    }
    let elements = FingerprintScratch::new().closure(m, gens).to_vec();
    let sub = m.induced(&elements)?;
    Ok((sub, Embedding { map: elements }))
}

/// Automorphisms of a structure: a generating set, the group order, rigidity.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct AutomorphismGroup {
    pub generators: Vec<Vec<usize>>,
    pub order: usize,
    pub is_rigid: bool,
}

fn compose_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    q.iter().map(|&x| p[x]).collect()
}

fn group_closure(gens: &[Vec<usize>], n: usize) -> HashSet<Vec<usize>> {
    let id: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::from([id.clone()]);
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = compose_perm(g, &p);
            if seen.insert(q.clone()) {
                frontier.push(q);
            }
        }
    }
    seen
}

pub fn automorphism_group(a: &FiniteStructure, limits: &Limits) -> Result<AutomorphismGroup, StructureError> {
    let all = enumerate_embeddings(a, a, limits)?;
    let mut generators: Vec<Vec<usize>> = Vec::new();
    let mut group = group_closure(&generators, a.size());
    for e in &all {
        if !group.contains(&e.map) {
            generators.push(e.map.clone());
            group = group_closure(&generators, a.size());
        }
    }
    debug_assert_eq!(group.len(), all.len());
    Ok(AutomorphismGroup { generators, order: all.len(), is_rigid: all.len() == 1 })
}

/// Cheap isomorphism invariant: size and per-relation tuple counts.
fn invariant(m: &FiniteStructure) -> Vec<usize> {
    let mut v = vec![m.size()];
    v.extend((0..m.signature().relations().len()).map(|i| m.relation_tuples(i).len()));
    v
}

/// One representative per isomorphism class of substructures of `m`
/// generated by at most `k` elements. Representatives are the first found
/// while scanning generator sets by size, then lexicographically.
pub fn age_enumerate(m: &FiniteStructure, k: usize, limits: &Limits) -> Result<Vec<FiniteStructure>, StructureError> {
    if m.size() > limits.max_universe {
        return Err(StructureError::UniverseTooLarge { size: m.size(), max: limits.max_universe });
    }
    let mut scratch = FingerprintScratch::new();
    let mut seen_sets: HashSet<Vec<usize>> = HashSet::new();
    let mut buckets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut out: Vec<FiniteStructure> = Vec::new();
    let mut examined = 0usize;
    for size in 0..=k.min(m.size()) {
        for gens in combinations(m.size(), size) {
            examined += 1;
            if examined > limits.max_candidates {
                return Err(StructureError::Budget(limits.max_candidates));
            }
            let mut elems = scratch.closure(m, &gens).to_vec();
            if elems.is_empty() {
                continue;
            }
            elems.sort_unstable();
            if !seen_sets.insert(elems.clone()) {
                continue;
            }
            let sub = m.induced(&elems)?;
            let bucket = buckets.entry(invariant(&sub)).or_default();
            let mut fresh = true;
            for &i in bucket.iter() {
                if isomorphic(&out[i], &sub, limits)? {
                    fresh = false;
                    break;
                }
            }
            if fresh {
                bucket.push(out.len());
                out.push(sub);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> FiniteStructure {
        let sig = Signature::new([("<", 2)], Vec::<(&str, usize)>::new()).unwrap();
        FiniteStructure::builder(sig, n).relation_from("<", |t| t[0] < t[1]).build().unwrap()
    }

    fn pred(n: usize) -> FiniteStructure {
        let sig = Signature::new(Vec::<(&str, usize)>::new(), [("p", 1)]).unwrap();
        FiniteStructure::builder(sig, n).function_from("p", |t| t[0].saturating_sub(1)).build().unwrap()
    }

    #[test]
    fn closure_follows_predecessor() {
        let (sub, inc) = generated_substructure(&pred(6), &[3]).unwrap();
        assert_eq!(sub.size(), 4);
        assert_eq!(inc.map, vec![3, 2, 1, 0]);
        let (one, _) = generated_substructure(&chain(3), &[1]).unwrap();
        assert_eq!(one.size(), 1);
    }

    #[test]
    fn chain_fingerprints() {
        let l = Limits::default();
        let c = chain(3);
        assert_eq!(qftp_fingerprint(&c, &[0, 1], &l), qftp_fingerprint(&c, &[1, 2], &l));
        assert_ne!(qftp_fingerprint(&c, &[0, 1], &l), qftp_fingerprint(&c, &[1, 0], &l));
        let p = pred(6);
        assert_ne!(qftp_fingerprint(&p, &[2], &l), qftp_fingerprint(&p, &[3], &l));
        assert!(matches!(
            qftp_fingerprint(&c, &[0; 7], &l),
            Err(StructureError::TupleTooLong { len: 7, max: 6 })
        ));
    }

    #[test]
    fn embeddings_and_copies_of_chains() {
        let l = Limits::default();
        let embs = enumerate_embeddings(&chain(2), &chain(3), &l).unwrap();
        assert_eq!(embs.iter().map(|e| e.map.clone()).collect::<Vec<_>>(), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(enumerate_copies(&chain(2), &chain(3), &l).unwrap().len(), 3);
        let g = automorphism_group(&chain(4), &l).unwrap();
        assert!(g.is_rigid);
    }

    #[test]
    fn age_of_predecessor_fragment() {
        let l = Limits::default();
        assert_eq!(age_enumerate(&pred(6), 1, &l).unwrap().len(), 6);
        assert_eq!(age_enumerate(&chain(4), 2, &l).unwrap().len(), 2);
    }

    #[test]
    fn signature_mismatch_is_reported() {
        let l = Limits::default();
        assert_eq!(enumerate_embeddings(&chain(2), &pred(3), &l), Err(StructureError::SignatureMismatch));
    }
}
