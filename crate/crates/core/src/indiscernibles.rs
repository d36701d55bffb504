//! Indexed families of tuples, quantifier-free indiscernibility and atomic
//! local basedness.
//!
//! Both checks visit every index tuple of length `1..=n_max` (repetitions
//! allowed) in lexicographic order and compare fingerprints: index tuples by
//! their type in the index structure, families by the type of the
//! concatenated host tuple.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::Limits;
use crate::structures::{FingerprintScratch, FiniteStructure, StructureDoc, StructureError};
use crate::tuples::for_each_tuple;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndiscernibleError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("invalid family: {0}")]
    InvalidFamily(String),
    #[error("{0} index tuples exceed the candidate budget")]
    Budget(usize),
}

/// `(ā_i | i ∈ I)`: element `i` of `index` is assigned `tuples[i]` in `host`.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedFamily {
    pub index: FiniteStructure,
    pub host: FiniteStructure,
    pub width: usize,
    pub tuples: Vec<Vec<usize>>,
}

impl IndexedFamily {
    pub fn new(
        index: FiniteStructure,
        host: FiniteStructure,
        width: usize,
        tuples: Vec<Vec<usize>>,
    ) -> Result<Self, IndiscernibleError> {
        if tuples.len() != index.size() {
            return Err(IndiscernibleError::InvalidFamily(format!(
                "{} tuples for an index of size {}",
                tuples.len(),
                index.size()
            )));
        }
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != width {
                return Err(IndiscernibleError::InvalidFamily(format!("tuple {i} has width {}, expected {width}", t.len())));
            }
            if let Some(&x) = t.iter().find(|&&x| x >= host.size()) {
                return Err(StructureError::ElementOutOfRange { element: x, size: host.size() }.into());
            }
        }
        Ok(IndexedFamily { index, host, width, tuples })
    }

    /// The family restricted to the index substructure on `elems` (listed in
    /// the order they receive in the restriction).
    pub fn restrict(&self, elems: &[usize]) -> Result<Self, IndiscernibleError> {
        let index = self.index.induced(elems)?;
        let tuples = elems.iter().map(|&i| self.tuples[i].clone()).collect();
        Ok(IndexedFamily { index, host: self.host.clone(), width: self.width, tuples })
    }

    fn concat(&self, idx: &[usize], out: &mut Vec<usize>) {
        out.clear();
        for &i in idx {
            out.extend_from_slice(&self.tuples[i]);
        }
    }
}

/// Document form: `{index, host, width, tuples}`, `tuples[i]` belonging to
/// index element `i`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyDoc {
    pub index: StructureDoc,
    pub host: StructureDoc,
    pub width: usize,
    pub tuples: Vec<Vec<usize>>,
}

impl FamilyDoc {
    pub fn from_family(f: &IndexedFamily) -> Self {
        FamilyDoc {
            index: StructureDoc::from_structure(&f.index),
            host: StructureDoc::from_structure(&f.host),
            width: f.width,
            tuples: f.tuples.clone(),
        }
    }

    pub fn to_family(&self) -> Result<IndexedFamily, IndiscernibleError> {
        IndexedFamily::new(self.index.to_structure()?, self.host.to_structure()?, self.width, self.tuples.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IndiscernibleCheck {
    Pass { index_tuples: usize, classes: usize },
    /// Index tuples of equal type whose host tuples differ in type.
    Counterexample { left: Vec<usize>, right: Vec<usize> },
}

impl IndiscernibleCheck {
    pub fn passed(&self) -> bool {
        matches!(self, IndiscernibleCheck::Pass { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LocalBasedCheck {
    Pass { index_tuples: usize },
    /// An index tuple of `Y` whose pattern `X` does not realize on any index
    /// tuple of the same type.
    Counterexample { tuple: Vec<usize> },
}

impl LocalBasedCheck {
    pub fn passed(&self) -> bool {
        matches!(self, LocalBasedCheck::Pass { .. })
    }
}

type Code = Box<[u32]>;

fn all_index_tuples(n: usize, n_max: usize, limits: &Limits) -> Result<Vec<Vec<usize>>, IndiscernibleError> {
    let total: usize = (1..=n_max).map(|k| n.saturating_pow(k as u32)).fold(0, usize::saturating_add);
    if total > limits.max_candidates {
        return Err(IndiscernibleError::Budget(total));
    }
    let mut out = Vec::with_capacity(total);
    for len in 1..=n_max {
        for_each_tuple(n, len, |t| {
            out.push(t.to_vec());
            true
        });
    }
    Ok(out)
}

fn check_lengths(fam: &IndexedFamily, n_max: usize, limits: &Limits) -> Result<(), IndiscernibleError> {
    if n_max > limits.max_tuple_len {
        return Err(StructureError::TupleTooLong { len: n_max, max: limits.max_tuple_len }.into());
    }
    let host_len = n_max * fam.width;
    if host_len > limits.max_tuple_len {
        return Err(StructureError::TupleTooLong { len: host_len, max: limits.max_tuple_len }.into());
    }
    Ok(())
}

/// `(index code, host code)` for every tuple, in input order.
fn codes(fam: &IndexedFamily, tuples: &[Vec<usize>]) -> Vec<(Code, Code)> {
    tuples
        .par_iter()
        .map_init(
            || (FingerprintScratch::new(), FingerprintScratch::new(), Vec::new()),
            |(si, sh, buf), t| {
                fam.concat(t, buf);
                let ic: Code = si.compute(&fam.index, t).into();
                let hc: Code = sh.compute(&fam.host, buf).into();
                (ic, hc)
            },
        )
        .collect()
}

/// Index tuples with equal index type must carry host tuples of equal type.
pub fn qf_indiscernible_check(fam: &IndexedFamily, n_max: usize, limits: &Limits) -> Result<IndiscernibleCheck, IndiscernibleError> {
    check_lengths(fam, n_max, limits)?;
    let tuples = all_index_tuples(fam.index.size(), n_max, limits)?;
    let codes = codes(fam, &tuples);
    let mut first: HashMap<&Code, (usize, &Code)> = HashMap::new();
    for (pos, (ic, hc)) in codes.iter().enumerate() {
        match first.get(ic) {
            Some(&(rep, rc)) if rc != hc => {
                return Ok(IndiscernibleCheck::Counterexample { left: tuples[rep].clone(), right: tuples[pos].clone() });
            }
            Some(_) => {}
            None => {
                first.insert(ic, (pos, hc));
            }
        }
    }
    Ok(IndiscernibleCheck::Pass { index_tuples: tuples.len(), classes: first.len() })
}

/// `Y` is locally based on `X`: every pattern `Y` shows on an index tuple is
/// shown by `X` on some index tuple of the same index type.
pub fn atomic_locally_based_check(
    x: &IndexedFamily,
    y: &IndexedFamily,
    n_max: usize,
    limits: &Limits,
) -> Result<LocalBasedCheck, IndiscernibleError> {
    if x.index != y.index {
        return Err(IndiscernibleError::InvalidFamily("families use different index structures".into()));
    }
    if x.width != y.width {
        return Err(IndiscernibleError::InvalidFamily(format!("widths {} and {} differ", x.width, y.width)));
    }
    if x.host.signature() != y.host.signature() {
        return Err(StructureError::SignatureMismatch.into());
    }
    check_lengths(x, n_max, limits)?;
    let tuples = all_index_tuples(x.index.size(), n_max, limits)?;
    let realized: HashSet<(Code, Code)> = codes(x, &tuples).into_iter().collect();
    for (pos, key) in codes(y, &tuples).into_iter().enumerate() {
        if !realized.contains(&key) {
            return Ok(LocalBasedCheck::Counterexample { tuple: tuples[pos].clone() });
        }
    }
    Ok(LocalBasedCheck::Pass { index_tuples: tuples.len() })
}

/// The identity family `a_i = i` of an `n`-chain indexed by a bare `n`-set.
pub fn noorder_family(n: usize) -> IndexedFamily {
    let index = crate::constructions::make_set(n);
    let host = crate::constructions::make_chain(n);
    IndexedFamily::new(index, host, 1, (0..n).map(|i| vec![i]).collect()).expect("valid")
}
