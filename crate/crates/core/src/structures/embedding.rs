//! Embedding search.
//!
//! A backtracking matcher assigns images to a generating sequence of the
//! source. After every assignment the partial map is closed under the
//! functions of both structures (images of terms are forced), and every
//! relation tuple that touches a newly mapped element is checked in both
//! directions. Relational sources are generated by their whole universe, so
//! the search degenerates to ordinary element-by-element backtracking.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{FingerprintScratch, FiniteStructure, StructureError};
use crate::limits::Limits;
use crate::tuples::{for_each_tuple, for_each_tuple_touching};

const NONE: usize = usize::MAX;

/// An injective map `source universe -> target universe` that preserves and
/// reflects relations and commutes with functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn image(&self) -> Vec<usize> {
        let mut v = self.map.clone();
        v.sort_unstable();
        v
    }

    /// `self ∘ inner`: first `inner`, then `self`.
    pub fn compose(&self, inner: &Embedding) -> Embedding {
        Embedding { map: inner.map.iter().map(|&x| self.map[x]).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }
}

/// A greedy generating sequence: scan the universe in order and keep every
/// element not already generated by the ones kept so far.
pub fn generating_sequence(a: &FiniteStructure) -> Vec<usize> {
    let mut scratch = FingerprintScratch::new();
    let mut gens = Vec::new();
    let mut closed = vec![false; a.size()];
    for &x in scratch.closure(a, &[]) {
        closed[x] = true;
    }
    for x in 0..a.size() {
        if closed[x] {
            continue;
        }
        gens.push(x);
        for &y in scratch.closure(a, &gens) {
            closed[y] = true;
        }
    }
    gens
}

struct Matcher<'a> {
    a: &'a FiniteStructure,
    c: &'a FiniteStructure,
    gens: Vec<usize>,
    map: Vec<usize>,
    used: Vec<bool>,
    order: Vec<usize>,
    processed: usize,
}

impl<'a> Matcher<'a> {
    fn new(a: &'a FiniteStructure, c: &'a FiniteStructure) -> Self {
        Matcher {
            a,
            c,
            gens: generating_sequence(a),
            map: vec![NONE; a.size()],
            used: vec![false; c.size()],
            order: Vec::with_capacity(a.size()),
            processed: 0,
        }
    }

    fn save(&self) -> (usize, usize) {
        (self.order.len(), self.processed)
    }

    fn restore(&mut self, (len, processed): (usize, usize)) {
        while self.order.len() > len {
            let x = self.order.pop().unwrap();
            self.used[self.map[x]] = false;
            self.map[x] = NONE;
        }
        self.processed = processed;
    }

    fn push(&mut self, x: usize, y: usize) -> bool {
        if self.map[x] != NONE {
            return self.map[x] == y;
        }
        if y >= self.used.len() || self.used[y] {
            return false;
        }
        self.map[x] = y;
        self.used[y] = true;
        self.order.push(x);
        true
    }

    /// Maps the constants; must run once before the search.
    fn start(&mut self) -> bool {
        for (fi, sym) in self.a.signature().functions().iter().enumerate() {
            if sym.arity == 0 {
                let (x, y) = (self.a.apply(fi, &[]), self.c.apply(fi, &[]));
                if !self.push(x, y) {
                    return false;
                }
            }
        }
        self.propagate()
    }

    fn assign(&mut self, x: usize, y: usize) -> bool {
        self.push(x, y) && self.propagate()
    }

    fn propagate(&mut self) -> bool {
        let (a, c) = (self.a, self.c);
        let mut ga = Vec::new();
        let mut gc = Vec::new();
        while self.processed < self.order.len() {
            let l = self.order.len();
            let p = self.processed;
            for (fi, sym) in a.signature().functions().iter().enumerate() {
                if sym.arity == 0 {
                    continue;
                }
                let (map, used, order) = (&mut self.map, &mut self.used, &mut self.order);
                let ok = for_each_tuple_touching(l, sym.arity, p, &mut |t| {
                    ga.clear();
                    ga.extend(t.iter().map(|&i| order[i]));
                    gc.clear();
                    gc.extend(ga.iter().map(|&x| map[x]));
                    let va = a.apply(fi, &ga);
                    let vc = c.apply(fi, &gc);
                    if map[va] != NONE {
                        return map[va] == vc;
                    }
                    if used[vc] {
                        return false;
                    }
                    map[va] = vc;
                    used[vc] = true;
                    order.push(va);
                    true
                });
                if !ok {
                    return false;
                }
            }
            for (ri, sym) in a.signature().relations().iter().enumerate() {
                let (map, order) = (&self.map, &self.order);
                let ok = for_each_tuple_touching(l, sym.arity, p, &mut |t| {
                    ga.clear();
                    ga.extend(t.iter().map(|&i| order[i]));
                    gc.clear();
                    gc.extend(ga.iter().map(|&x| map[x]));
                    a.holds(ri, &ga) == c.holds(ri, &gc)
                });
                if !ok {
                    return false;
                }
            }
            self.processed = l;
        }
        true
    }

    fn search(&mut self, gi: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        let mut gi = gi;
        while gi < self.gens.len() && self.map[self.gens[gi]] != NONE {
            gi += 1;
        }
        if gi == self.gens.len() {
            debug_assert_eq!(self.order.len(), self.a.size());
            return visit(&self.map);
        }
        let x = self.gens[gi];
        for y in 0..self.c.size() {
            if self.used[y] {
                continue;
            }
            let saved = self.save();
            if self.assign(x, y) && !self.search(gi + 1, visit) {
                self.restore(saved);
                return false;
            }
            self.restore(saved);
        }
        true
    }
}

fn check_pair(a: &FiniteStructure, c: &FiniteStructure, limits: &Limits) -> Result<(), StructureError> {
    if a.signature() != c.signature() {
        return Err(StructureError::SignatureMismatch);
    }
    for s in [a.size(), c.size()] {
        if s > limits.max_universe {
            return Err(StructureError::UniverseTooLarge { size: s, max: limits.max_universe });
        }
    }
    Ok(())
}

/// Visits every embedding extending `partial` (pairs `(source, target)`), in
/// search order. Returns `false` if `visit` stopped the search.
pub(crate) fn for_each_embedding_extending(
    a: &FiniteStructure,
    c: &FiniteStructure,
    partial: &[(usize, usize)],
    visit: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    if a.size() > c.size() {
        return true;
    }
    let mut m = Matcher::new(a, c);
    if !m.start() {
        return true;
    }
    for &(x, y) in partial {
        if x >= a.size() || !m.assign(x, y) {
            return true;
        }
    }
    m.search(0, visit)
}

/// `Emb(a, c)` in lexicographic order of the map sequences.
pub fn enumerate_embeddings(
    a: &FiniteStructure,
    c: &FiniteStructure,
    limits: &Limits,
) -> Result<Vec<Embedding>, StructureError> {
    extend_partial(a, c, &[], limits)
}

/// All embeddings `a -> c` agreeing with the given partial assignment, in
/// lexicographic order.
pub fn extend_partial(
    a: &FiniteStructure,
    c: &FiniteStructure,
    partial: &[(usize, usize)],
    limits: &Limits,
) -> Result<Vec<Embedding>, StructureError> {
    check_pair(a, c, limits)?;
    let mut out = Vec::new();
    for_each_embedding_extending(a, c, partial, &mut |m| {
        out.push(Embedding { map: m.to_vec() });
        true
    });
    out.sort_unstable();
    Ok(out)
}

pub fn count_embeddings(a: &FiniteStructure, c: &FiniteStructure, limits: &Limits) -> Result<usize, StructureError> {
    check_pair(a, c, limits)?;
    let mut n = 0;
    for_each_embedding_extending(a, c, &[], &mut |_| {
        n += 1;
        true
    });
    Ok(n)
}

pub fn isomorphic(a: &FiniteStructure, b: &FiniteStructure, limits: &Limits) -> Result<bool, StructureError> {
    check_pair(a, b, limits)?;
    if a.size() != b.size() {
        return Ok(false);
    }
    let mut found = false;
    for_each_embedding_extending(a, b, &[], &mut |_| {
        found = true;
        false
    });
    Ok(found)
}

/// Direct check of the embedding conditions by exhaustive table comparison.
/// Shares no code with the search.
pub fn is_embedding(a: &FiniteStructure, c: &FiniteStructure, map: &[usize]) -> bool {
    if a.signature() != c.signature() || map.len() != a.size() {
        return false;
    }
    if map.iter().any(|&y| y >= c.size()) || map.iter().collect::<HashSet<_>>().len() != map.len() {
        return false;
    }
    let mut img = Vec::new();
    for (ri, sym) in a.signature().relations().iter().enumerate() {
        let ok = for_each_tuple(a.size(), sym.arity, |t| {
            img.clear();
            img.extend(t.iter().map(|&x| map[x]));
            a.holds(ri, t) == c.holds(ri, &img)
        });
        if !ok {
            return false;
        }
    }
    for (fi, sym) in a.signature().functions().iter().enumerate() {
        let ok = for_each_tuple(a.size(), sym.arity, |t| {
            img.clear();
            img.extend(t.iter().map(|&x| map[x]));
            map[a.apply(fi, t)] == c.apply(fi, &img)
        });
        if !ok {
            return false;
        }
    }
    true
}

/// Copies of `a` in `c`: image sets of embeddings, deduplicated and sorted.
pub fn enumerate_copies(
    a: &FiniteStructure,
    c: &FiniteStructure,
    limits: &Limits,
) -> Result<Vec<Vec<usize>>, StructureError> {
    check_pair(a, c, limits)?;
    let mut set = BTreeSet::new();
    for_each_embedding_extending(a, c, &[], &mut |m| {
        let mut img = m.to_vec();
        img.sort_unstable();
        set.insert(img);
        true
    });
    Ok(set.into_iter().collect())
}
