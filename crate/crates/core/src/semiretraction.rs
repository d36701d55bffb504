//! Semi-retractions between finite fragments.
//!
//! A witness carries three structures: `a_frag`, the fragment of the
//! structure being transferred to; `b_frag`, the fragment it maps into; and
//! `a_host`, a fragment of the first structure's class that receives `f`.
//! For maps that return into the original fragment `a_host` is `a_frag`
//! itself; constructions whose `f` needs more room (levels of a tree land in
//! whole equivalence classes) supply a larger host.
//!
//! Axioms are checked over tuples of bounded length only, and reports say so.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::Limits;
use crate::ramsey::{Coloring, Mode};
use crate::structures::{
    check_tuple, enumerate_embeddings, extend_partial, FingerprintScratch, FiniteStructure, StructureDoc,
    StructureError,
};
use crate::tuples::{falling_factorial, for_each_injective_tuple, for_each_tuple};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemiRetractionError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("map `{name}` is invalid: {reason}")]
    InvalidMap { name: String, reason: String },
    #[error("fragment incomplete: {0}")]
    FragmentIncomplete(String),
    #[error("{0} tuples exceed the candidate budget")]
    Budget(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("internal consistency alarm: {0}")]
    Alarm(String),
}

/// An injective map between structures whose signatures may differ.
#[derive(Clone, Debug)]
pub struct CrossMap {
    pub source: Arc<FiniteStructure>,
    pub target: Arc<FiniteStructure>,
    pub map: Vec<usize>,
}

fn validate_map(name: &str, map: &[usize], source: usize, target: usize) -> Result<(), SemiRetractionError> {
    let bad = |reason: String| SemiRetractionError::InvalidMap { name: name.to_string(), reason };
    if map.len() != source {
        return Err(bad(format!("defined on {} points, source has {}", map.len(), source)));
    }
    if let Some(&y) = map.iter().find(|&&y| y >= target) {
        return Err(bad(format!("value {y} outside target of size {target}")));
    }
    let mut seen = vec![false; target];
    for &y in map {
        if std::mem::replace(&mut seen[y], true) {
            return Err(bad(format!("value {y} hit twice")));
        }
    }
    Ok(())
}

impl CrossMap {
    pub fn new(source: Arc<FiniteStructure>, target: Arc<FiniteStructure>, map: Vec<usize>) -> Result<Self, SemiRetractionError> {
        validate_map("map", &map, source.size(), target.size())?;
        Ok(CrossMap { source, target, map })
    }

    pub fn apply(&self, t: &[usize]) -> Vec<usize> {
        t.iter().map(|&x| self.map[x]).collect()
    }

    pub fn inverse(&self) -> Vec<Option<usize>> {
        let mut inv = vec![None; self.target.size()];
        for (x, &y) in self.map.iter().enumerate() {
            inv[y] = Some(x);
        }
        inv
    }
}

#[derive(Clone, Debug)]
pub struct SemiRetractionWitness {
    pub a_frag: Arc<FiniteStructure>,
    pub b_frag: Arc<FiniteStructure>,
    pub a_host: Arc<FiniteStructure>,
    pub g: Vec<usize>,
    pub f: Vec<usize>,
    pub depth: usize,
}

impl SemiRetractionWitness {
    pub fn new(
        a_frag: Arc<FiniteStructure>,
        b_frag: Arc<FiniteStructure>,
        a_host: Arc<FiniteStructure>,
        g: Vec<usize>,
        f: Vec<usize>,
        depth: usize,
    ) -> Result<Self, SemiRetractionError> {
        validate_map("g", &g, a_frag.size(), b_frag.size())?;
        validate_map("f", &f, b_frag.size(), a_host.size())?;
        if a_frag.signature() != a_host.signature() {
            return Err(SemiRetractionError::InvalidInput("a_frag and a_host have different signatures".into()));
        }
        Ok(SemiRetractionWitness { a_frag, b_frag, a_host, g, f, depth })
    }

    /// Witness whose `f` returns into `a_frag` itself.
    pub fn closed(
        a_frag: Arc<FiniteStructure>,
        b_frag: Arc<FiniteStructure>,
        g: Vec<usize>,
        f: Vec<usize>,
        depth: usize,
    ) -> Result<Self, SemiRetractionError> {
        Self::new(a_frag.clone(), b_frag, a_frag, g, f, depth)
    }

    pub fn g_map(&self) -> CrossMap {
        CrossMap { source: self.a_frag.clone(), target: self.b_frag.clone(), map: self.g.clone() }
    }

    pub fn f_map(&self) -> CrossMap {
        CrossMap { source: self.b_frag.clone(), target: self.a_host.clone(), map: self.f.clone() }
    }

    pub fn fg(&self) -> Vec<usize> {
        self.g.iter().map(|&y| self.f[y]).collect()
    }
}

/// Document form: `{a_frag, b_frag, a_host?, g: [[x, y]..], f: [[x, y]..], depth}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub a_frag: StructureDoc,
    pub b_frag: StructureDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_host: Option<StructureDoc>,
    pub g: Vec<(usize, usize)>,
    pub f: Vec<(usize, usize)>,
    pub depth: usize,
}

fn pairs_to_map(name: &str, pairs: &[(usize, usize)], size: usize) -> Result<Vec<usize>, SemiRetractionError> {
    let mut map = vec![usize::MAX; size];
    for &(x, y) in pairs {
        if x >= size || map[x] != usize::MAX {
            return Err(SemiRetractionError::InvalidMap {
                name: name.to_string(),
                reason: format!("bad or repeated source point {x}"),
            });
        }
        map[x] = y;
    }
    if map.contains(&usize::MAX) {
        return Err(SemiRetractionError::InvalidMap { name: name.to_string(), reason: "not total".into() });
    }
    Ok(map)
}

impl WitnessDoc {
    pub fn from_witness(w: &SemiRetractionWitness) -> Self {
        let same_host = Arc::ptr_eq(&w.a_frag, &w.a_host) || w.a_frag == w.a_host;
        WitnessDoc {
            a_frag: StructureDoc::from_structure(&w.a_frag),
            b_frag: StructureDoc::from_structure(&w.b_frag),
            a_host: (!same_host).then(|| StructureDoc::from_structure(&w.a_host)),
            g: w.g.iter().copied().enumerate().collect(),
            f: w.f.iter().copied().enumerate().collect(),
            depth: w.depth,
        }
    }

    pub fn to_witness(&self) -> Result<SemiRetractionWitness, SemiRetractionError> {
        let a_frag = Arc::new(self.a_frag.to_structure()?);
        let b_frag = Arc::new(self.b_frag.to_structure()?);
        let a_host = match &self.a_host {
            Some(doc) => Arc::new(doc.to_structure()?),
            None => a_frag.clone(),
        };
        let g = pairs_to_map("g", &self.g, a_frag.size())?;
        let f = pairs_to_map("f", &self.f, b_frag.size())?;
        SemiRetractionWitness::new(a_frag, b_frag, a_host, g, f, self.depth)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum QftpCheck {
    Pass { tuples: usize },
    /// Two source tuples of equal type whose images differ in type.
    Counterexample { left: Vec<usize>, right: Vec<usize> },
}

impl QftpCheck {
    pub fn passed(&self) -> bool {
        matches!(self, QftpCheck::Pass { .. })
    }
}

struct Classes {
    first: HashMap<Box<[u32]>, (Vec<usize>, Box<[u32]>)>,
    conflict: Option<(Vec<usize>, Vec<usize>)>,
    tuples: usize,
}

/// Checks that equal-type source tuples (lengths `1..=n_max`) have
/// equal-type images. Only injective tuples are visited: the type of a tuple
/// with repetitions is fixed by its equality pattern and the type of its
/// distinct entries, and an injective map keeps the equality pattern.
pub fn check_qftp_respecting(h: &CrossMap, n_max: usize, limits: &Limits) -> Result<QftpCheck, SemiRetractionError> {
    if n_max > limits.max_tuple_len {
        return Err(StructureError::TupleTooLong { len: n_max, max: limits.max_tuple_len }.into());
    }
    let n = h.source.size();
    let total: usize = (1..=n_max).map(|k| falling_factorial(n, k)).fold(0, usize::saturating_add);
    if total > limits.max_candidates {
        return Err(SemiRetractionError::Budget(total));
    }
    let mut tuples = 0;
    for len in 1..=n_max.min(n) {
        // One chunk per first coordinate; chunks are merged in order, so the
        // reported pair does not depend on scheduling.
        let chunks: Vec<Classes> = (0..n)
            .into_par_iter()
            .map(|x0| {
                let mut src = FingerprintScratch::new();
                let mut dst = FingerprintScratch::new();
                let mut cls = Classes { first: HashMap::new(), conflict: None, tuples: 0 };
                let mut t = vec![x0];
                let mut img = Vec::new();
                let mut visit = |t: &[usize]| {
                    cls.tuples += 1;
                    img.clear();
                    img.extend(t.iter().map(|&x| h.map[x]));
                    let key = src.compute(&h.source, t);
                    let val = dst.compute(&h.target, &img);
                    match cls.first.get(key) {
                        Some((rep, v)) => {
                            if **v != *val {
                                cls.conflict = Some((rep.clone(), t.to_vec()));
                                return false;
                            }
                        }
                        None => {
                            let key: Box<[u32]> = key.into();
                            cls.first.insert(key, (t.to_vec(), val.into()));
                        }
                    }
                    true
                };
                extend_injective(n, len, &mut t, &mut visit);
                cls
            })
            .collect();
        let mut global: HashMap<Box<[u32]>, (Vec<usize>, Box<[u32]>)> = HashMap::new();
        for chunk in chunks {
            tuples += chunk.tuples;
            if let Some((left, right)) = chunk.conflict {
                return Ok(QftpCheck::Counterexample { left, right });
            }
            let mut entries: Vec<_> = chunk.first.into_iter().collect();
            entries.sort_by(|a, b| a.1 .0.cmp(&b.1 .0));
            for (key, (rep, val)) in entries {
                match global.get(&key) {
                    Some((grep, gval)) if *gval != val => {
                        return Ok(QftpCheck::Counterexample { left: grep.clone(), right: rep });
                    }
                    Some(_) => {}
                    None => {
                        global.insert(key, (rep, val));
                    }
                }
            }
        }
    }
    Ok(QftpCheck::Pass { tuples })
}

/// Visits injective tuples of length `len` extending the prefix `t`, in
/// lexicographic order.
fn extend_injective(n: usize, len: usize, t: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if t.len() == len {
        return visit(t);
    }
    for x in 0..n {
        if t.contains(&x) {
            continue;
        }
        t.push(x);
        let go_on = extend_injective(n, len, t, visit);
        t.pop();
        if !go_on {
            return false;
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CompositionCheck {
    Pass,
    Counterexample { symbol: String, args: Vec<usize> },
}

impl CompositionCheck {
    pub fn passed(&self) -> bool {
        matches!(self, CompositionCheck::Pass)
    }
}

/// Whether `f ∘ g` embeds `a_frag` into `a_host`; on failure, the first
/// symbol and argument tuple (over `a_frag`) where it breaks.
pub fn check_composition_embedding(w: &SemiRetractionWitness) -> CompositionCheck {
    let fg = w.fg();
    let (a, host) = (&*w.a_frag, &*w.a_host);
    let mut img = Vec::new();
    for (ri, sym) in a.signature().relations().iter().enumerate() {
        let mut bad = None;
        for_each_tuple(a.size(), sym.arity, |t| {
            img.clear();
            img.extend(t.iter().map(|&x| fg[x]));
            if a.holds(ri, t) != host.holds(ri, &img) {
                bad = Some(t.to_vec());
                return false;
            }
            true
        });
        if let Some(args) = bad {
            return CompositionCheck::Counterexample { symbol: sym.name.clone(), args };
        }
    }
    for (fi, sym) in a.signature().functions().iter().enumerate() {
        let mut bad = None;
        for_each_tuple(a.size(), sym.arity, |t| {
            img.clear();
            img.extend(t.iter().map(|&x| fg[x]));
            if fg[a.apply(fi, t)] != host.apply(fi, &img) {
                bad = Some(t.to_vec());
                return false;
            }
            true
        });
        if let Some(args) = bad {
            return CompositionCheck::Counterexample { symbol: sym.name.clone(), args };
        }
    }
    CompositionCheck::Pass
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SemiRetractionReport {
    /// Longest tuple length checked; the report says nothing beyond it.
    pub depth: usize,
    pub g_respecting: QftpCheck,
    pub f_respecting: QftpCheck,
    pub composition: CompositionCheck,
}

impl SemiRetractionReport {
    pub fn passed(&self) -> bool {
        self.g_respecting.passed() && self.f_respecting.passed() && self.composition.passed()
    }
}

pub fn verify_semiretraction(w: &SemiRetractionWitness, limits: &Limits) -> Result<SemiRetractionReport, SemiRetractionError> {
    Ok(SemiRetractionReport {
        depth: w.depth,
        g_respecting: check_qftp_respecting(&w.g_map(), w.depth, limits)?,
        f_respecting: check_qftp_respecting(&w.f_map(), w.depth, limits)?,
        composition: check_composition_embedding(w),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RestrictedCheck {
    Pass { matches: usize },
    /// Some entry of `c1` has no preimage under `f`.
    EscapesImage { c1: Vec<usize> },
    /// The preimage exists but leaves the entries of `b0`.
    OutsideTuple { c1: Vec<usize>, c0: Vec<usize> },
    /// The preimage has a type other than that of `a0`.
    WrongType { c1: Vec<usize>, c0: Vec<usize> },
}

impl RestrictedCheck {
    pub fn passed(&self) -> bool {
        matches!(self, RestrictedCheck::Pass { .. })
    }
}

/// Restricted inverse images: every tuple `c1` inside `⟨f(b0)⟩` with the type
/// of `a` (a tuple of `pattern`, same signature as `f`'s target) must pull
/// back under `f` to a tuple inside `b0` with the type of `a0`.
pub fn check_restricted_inverse_images(
    f: &CrossMap,
    pattern: &FiniteStructure,
    a: &[usize],
    b0: &[usize],
    a0: &[usize],
    limits: &Limits,
) -> Result<RestrictedCheck, SemiRetractionError> {
    if a.len() != a0.len() {
        return Err(SemiRetractionError::InvalidInput(format!(
            "pattern has length {}, witness tuple has length {}",
            a.len(),
            a0.len()
        )));
    }
    if pattern.signature() != f.target.signature() {
        return Err(StructureError::SignatureMismatch.into());
    }
    check_tuple(pattern, a, limits)?;
    check_tuple(&f.source, b0, limits)?;
    check_tuple(&f.source, a0, limits)?;
    let mut scratch = FingerprintScratch::new();
    let want = scratch.fingerprint(pattern, a);
    let want0 = scratch.fingerprint(&f.source, a0);
    let fb0 = f.apply(b0);
    let span = scratch.closure(&f.target, &fb0).to_vec();
    let inv = f.inverse();
    let in_b0: HashSet<usize> = b0.iter().copied().collect();
    let mut result = None;
    let mut matches = 0;
    let mut c1 = Vec::new();
    for_each_tuple(span.len(), a.len(), |idx| {
        c1.clear();
        c1.extend(idx.iter().map(|&i| span[i]));
        if scratch.compute(&f.target, &c1) != want.code() {
            return true;
        }
        matches += 1;
        let c0: Option<Vec<usize>> = c1.iter().map(|&y| inv[y]).collect();
        let Some(c0) = c0 else {
            result = Some(RestrictedCheck::EscapesImage { c1: c1.clone() });
            return false;
        };
        if !c0.iter().all(|x| in_b0.contains(x)) {
            result = Some(RestrictedCheck::OutsideTuple { c1: c1.clone(), c0 });
            return false;
        }
        if scratch.compute(&f.source, &c0) != want0.code() {
            result = Some(RestrictedCheck::WrongType { c1: c1.clone(), c0 });
            return false;
        }
        true
    });
    Ok(result.unwrap_or(RestrictedCheck::Pass { matches }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedSweep {
    pub checks: usize,
    pub failure: Option<(Vec<usize>, Vec<usize>, Vec<usize>, RestrictedCheck)>,
}

/// Restricted inverse images over a family of instances: for every increasing
/// tuple `b` of `a_frag` with length `≤ b_len`, every injective `a` with
/// length `≤ a_len`, and every `b0'` in `b_frag` of the same type as `g(b)`,
/// `b0'` has the property for `a` witnessed by `g(a)`. The `b0'` are found as
/// images of `g(b)` under embeddings of `⟨g(b)⟩` into `b_frag`.
pub fn restricted_sweep(
    w: &SemiRetractionWitness,
    a_len: usize,
    b_len: usize,
    limits: &Limits,
) -> Result<RestrictedSweep, SemiRetractionError> {
    let f = w.f_map();
    let n = w.a_frag.size();
    let mut a_tuples = Vec::new();
    for len in 1..=a_len {
        for_each_injective_tuple(n, len, |t| {
            a_tuples.push(t.to_vec());
            true
        });
    }
    let mut checks = 0;
    for len in 1..=b_len.min(n) {
        for b in crate::tuples::combinations(n, len) {
            let gb: Vec<usize> = b.iter().map(|&x| w.g[x]).collect();
            let (sub, inclusion) = crate::structures::generated_substructure(&w.b_frag, &gb)?;
            let positions: Vec<usize> =
                gb.iter().map(|y| inclusion.map.iter().position(|z| z == y).expect("generator in closure")).collect();
            for e in enumerate_embeddings(&sub, &w.b_frag, limits)? {
                let b0: Vec<usize> = positions.iter().map(|&p| e.map[p]).collect();
                for a in &a_tuples {
                    let ga: Vec<usize> = a.iter().map(|&x| w.g[x]).collect();
                    let res = check_restricted_inverse_images(&f, &w.a_frag, a, &b0, &ga, limits)?;
                    checks += 1;
                    if !res.passed() {
                        return Ok(RestrictedSweep { checks, failure: Some((b, b0, a.clone(), res)) });
                    }
                }
            }
        }
    }
    Ok(RestrictedSweep { checks, failure: None })
}

/// Lookup table for a coloring of embeddings.
fn color_table(c: &Coloring) -> HashMap<&[usize], usize> {
    c.domain.iter().map(Vec::as_slice).zip(c.colors.iter().copied()).collect()
}

/// Substructures used by the transfer: `A = fg(A0)` and `B = fg(B0)` inside
/// `a_host`, and `A' = ⟨g(A0)⟩`, `B' = ⟨g(B0)⟩` inside `b_frag`.
#[derive(Clone, Debug)]
pub struct TransferSetup {
    /// Elements of `a_host` listing `A` (`A`'s element `i` is `a_elems[i]`).
    pub a_elems: Vec<usize>,
    pub a: FiniteStructure,
    pub b_elems: Vec<usize>,
    pub b: FiniteStructure,
    pub a_prime_elems: Vec<usize>,
    pub a_prime: FiniteStructure,
    pub b_prime_elems: Vec<usize>,
    pub b_prime: FiniteStructure,
    /// Positions in `A'` of `g(A0)`, aligned with `a_elems`.
    pub a_gen_pos: Vec<usize>,
    pub b_gen_pos: Vec<usize>,
}

impl TransferSetup {
    /// `a0`, `b0` list the elements of substructures of `a_frag`.
    pub fn new(w: &SemiRetractionWitness, a0: &[usize], b0: &[usize]) -> Result<Self, SemiRetractionError> {
        let mut scratch = FingerprintScratch::new();
        for (name, set) in [("A0", a0), ("B0", b0)] {
            let closure = scratch.closure(&w.a_frag, set).len();
            let distinct: HashSet<_> = set.iter().collect();
            if closure != distinct.len() || distinct.len() != set.len() {
                return Err(SemiRetractionError::InvalidInput(format!("{name} must list a substructure without repeats")));
            }
        }
        let fg = w.fg();
        let a_elems: Vec<usize> = a0.iter().map(|&x| fg[x]).collect();
        let b_elems: Vec<usize> = b0.iter().map(|&x| fg[x]).collect();
        let a = w.a_host.induced(&a_elems).map_err(|e| SemiRetractionError::FragmentIncomplete(e.to_string()))?;
        let b = w.a_host.induced(&b_elems).map_err(|e| SemiRetractionError::FragmentIncomplete(e.to_string()))?;
        let ga: Vec<usize> = a0.iter().map(|&x| w.g[x]).collect();
        let gb: Vec<usize> = b0.iter().map(|&x| w.g[x]).collect();
        let a_prime_elems = scratch.closure(&w.b_frag, &ga).to_vec();
        let b_prime_elems = scratch.closure(&w.b_frag, &gb).to_vec();
        let a_prime = w.b_frag.induced(&a_prime_elems)?;
        let b_prime = w.b_frag.induced(&b_prime_elems)?;
        let pos = |elems: &[usize], y: usize| elems.iter().position(|&z| z == y).expect("generator in closure");
        let a_gen_pos = ga.iter().map(|&y| pos(&a_prime_elems, y)).collect();
        let b_gen_pos = gb.iter().map(|&y| pos(&b_prime_elems, y)).collect();
        Ok(TransferSetup { a_elems, a, b_elems, b, a_prime_elems, a_prime, b_prime_elems, b_prime, a_gen_pos, b_gen_pos })
    }

    /// `Emb(A, a_host)` in canonical order, the domain of the colorings `c`.
    pub fn source_domain(&self, w: &SemiRetractionWitness, limits: &Limits) -> Result<Vec<Vec<usize>>, SemiRetractionError> {
        Ok(enumerate_embeddings(&self.a, &w.a_host, limits)?.into_iter().map(|e| e.map).collect())
    }

    /// `f(e ↾ g(A0))` as a map on `A`, checked to be an embedding into
    /// `a_host`.
    fn pull(&self, w: &SemiRetractionWitness, e: &[usize]) -> Result<Vec<usize>, SemiRetractionError> {
        let m: Vec<usize> = self.a_gen_pos.iter().map(|&p| w.f[e[p]]).collect();
        if !crate::structures::is_embedding(&self.a, &w.a_host, &m) {
            return Err(SemiRetractionError::FragmentIncomplete(format!(
                "restriction of {e:?} does not pull back to an embedding"
            )));
        }
        Ok(m)
    }
}

/// `c0(e) = c(f(e ↾ g(A0)))` on `Emb(A', b_frag)`.
pub fn induced_coloring(
    w: &SemiRetractionWitness,
    setup: &TransferSetup,
    c: &Coloring,
    limits: &Limits,
) -> Result<Coloring, SemiRetractionError> {
    let table = color_table(c);
    let domain: Vec<Vec<usize>> =
        enumerate_embeddings(&setup.a_prime, &w.b_frag, limits)?.into_iter().map(|e| e.map).collect();
    let mut colors = Vec::with_capacity(domain.len());
    for e in &domain {
        let m = setup.pull(w, e)?;
        let col = table
            .get(m.as_slice())
            .ok_or_else(|| SemiRetractionError::InvalidInput(format!("coloring misses embedding {m:?}")))?;
        colors.push(*col);
    }
    Ok(Coloring { mode: Mode::Embedding, domain, colors })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferReport {
    /// `h ∈ Emb(B', b_frag)`.
    pub h: Vec<usize>,
    /// `k = f(h ↾ g(B0)) ∈ Emb(B, a_host)`.
    pub k: Vec<usize>,
    /// Colors of `c0` on `h ∘ Emb(A', B')`.
    pub c0_colors: Vec<usize>,
    /// Colors of `c` on `k ∘ Emb(A, B)`.
    pub c_colors: Vec<usize>,
    /// Number of `j ∈ Emb(A, B)` for which `c(k∘j) = c0(h∘j')` was checked.
    pub identities: usize,
    /// First `j` breaking the identity, if any.
    pub mismatch: Option<Vec<usize>>,
}

impl TransferReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none() && self.c_colors.len() <= self.c0_colors.len()
    }
}

fn distinct_sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}

/// Runs the transfer construction. With `h = None` the `h` giving `c0` the
/// fewest colors on `h ∘ Emb(A', B')` is used (first in order on ties).
pub fn transfer_pipeline_check(
    w: &SemiRetractionWitness,
    setup: &TransferSetup,
    c: &Coloring,
    h: Option<&[usize]>,
    limits: &Limits,
) -> Result<TransferReport, SemiRetractionError> {
    let c0 = induced_coloring(w, setup, c, limits)?;
    let c0_table = color_table(&c0);
    let c_table = color_table(c);
    let inner_prime = enumerate_embeddings(&setup.a_prime, &setup.b_prime, limits)?;
    let colors_under = |h: &[usize]| -> Result<Vec<usize>, SemiRetractionError> {
        let mut out = Vec::new();
        for j in &inner_prime {
            let hj: Vec<usize> = j.map.iter().map(|&x| h[x]).collect();
            out.push(*c0_table.get(hj.as_slice()).ok_or_else(|| SemiRetractionError::Alarm(format!("{hj:?} not in Emb(A', B)")))?);
        }
        Ok(distinct_sorted(out))
    };
    let h: Vec<usize> = match h {
        Some(h) => {
            if !crate::structures::is_embedding(&setup.b_prime, &w.b_frag, h) {
                return Err(SemiRetractionError::InvalidInput("h is not an embedding of B'".into()));
            }
            h.to_vec()
        }
        None => {
            let mut best: Option<(usize, Vec<usize>)> = None;
            for e in enumerate_embeddings(&setup.b_prime, &w.b_frag, limits)? {
                let n = colors_under(&e.map)?.len();
                if best.as_ref().map_or(true, |(m, _)| n < *m) {
                    best = Some((n, e.map));
                }
            }
            best.ok_or_else(|| SemiRetractionError::FragmentIncomplete("B' has no embedding into b_frag".into()))?.1
        }
    };
    let c0_colors = colors_under(&h)?;
    let k: Vec<usize> = setup.b_gen_pos.iter().map(|&p| w.f[h[p]]).collect();
    if !crate::structures::is_embedding(&setup.b, &w.a_host, &k) {
        return Err(SemiRetractionError::Alarm(format!("k = {k:?} is not an embedding of B")));
    }
    // Element i of A (resp. B) is fg of the i-th entry of A0 (resp. B0), so
    // (fg)^{-1}(j) and then g act on positions directly.
    let mut c_colors = Vec::new();
    let mut identities = 0;
    let mut mismatch = None;
    for j in enumerate_embeddings(&setup.a, &setup.b, limits)? {
        let kj: Vec<usize> = j.map.iter().map(|&x| k[x]).collect();
        let ck = *c_table.get(kj.as_slice()).ok_or_else(|| SemiRetractionError::Alarm(format!("{kj:?} not colored")))?;
        c_colors.push(ck);
        // f^{-1}(j): g(A0) -> g(B0), as a partial map A' -> B' on positions.
        let partial: Vec<(usize, usize)> = j
            .map
            .iter()
            .enumerate()
            .map(|(i, &jb)| (setup.a_gen_pos[i], setup.b_gen_pos[jb]))
            .collect();
        let exts = extend_partial(&setup.a_prime, &setup.b_prime, &partial, limits)?;
        if exts.len() != 1 {
            return Err(SemiRetractionError::Alarm(format!(
                "partial map {partial:?} has {} extensions to Emb(A', B')",
                exts.len()
            )));
        }
        let hj: Vec<usize> = exts[0].map.iter().map(|&x| h[x]).collect();
        let c0v = *c0_table.get(hj.as_slice()).ok_or_else(|| SemiRetractionError::Alarm(format!("{hj:?} not colored")))?;
        identities += 1;
        if ck != c0v && mismatch.is_none() {
            mismatch = Some(j.map.clone());
        }
    }
    Ok(TransferReport { h, k, c0_colors, c_colors: distinct_sorted(c_colors), identities, mismatch })
}

/// A qftp-preserving injection between tuples, as a finite map on elements.
pub type FiniteMap = BTreeMap<usize, usize>;

fn coordinate_maps(
    src_m: &FiniteStructure,
    src: &[usize],
    dst_m: &FiniteStructure,
    dst: &[usize],
    scratch: &mut FingerprintScratch,
) -> Vec<FiniteMap> {
    let want = scratch.fingerprint(src_m, src);
    let mut out = Vec::new();
    for_each_injective_tuple(dst.len(), src.len(), |sigma| {
        let img: Vec<usize> = sigma.iter().map(|&i| dst[i]).collect();
        if scratch.compute(dst_m, &img) == want.code() {
            out.push(src.iter().copied().zip(img.iter().copied()).collect());
        }
        true
    });
    out
}

fn compose(outer: &FiniteMap, inner: &FiniteMap) -> Option<FiniteMap> {
    inner.iter().map(|(&x, y)| outer.get(y).map(|&z| (x, z))).collect()
}

fn image_map(f: &[usize], m: &FiniteMap) -> FiniteMap {
    m.iter().map(|(&x, &y)| (f[x], f[y])).collect()
}

/// `Φ_{ā,c̄}(ψ) = f(ψ) ∘ f ∘ g`, composed as finite maps on the entries of `ā`.
pub fn phi(w: &SemiRetractionWitness, a: &[usize], psi: &FiniteMap) -> Option<FiniteMap> {
    let fg: FiniteMap = a.iter().map(|&x| (x, w.f[w.g[x]])).collect();
    compose(&image_map(&w.f, psi), &fg)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PreadjunctionReport {
    pub objects: usize,
    pub identities: usize,
    /// `(ā, b̄, c̄, v, ψ)` for the first failure.
    pub failure: Option<(Vec<usize>, Vec<usize>, Vec<usize>, FiniteMap, FiniteMap)>,
}

/// Checks `Φ_{ā,c̄}(ψ ∘ g(v)) = Φ_{b̄,c̄}(ψ) ∘ v` for all injective tuples
/// `ā, b̄` of `a_frag` and `c̄` of `b_frag` with lengths `≤ max_len`, all
/// qftp-preserving `v: ā → b̄` and `ψ: g(b̄) → c̄`. Also checks that each
/// `Φ(ψ)` is qftp-preserving into `f(c̄)`.
pub fn preadjunction_check_with<P>(
    w: &SemiRetractionWitness,
    max_len: usize,
    limits: &Limits,
    phi: P,
) -> Result<PreadjunctionReport, SemiRetractionError>
where
    P: Fn(&SemiRetractionWitness, &[usize], &FiniteMap) -> Option<FiniteMap> + Sync,
{
    let mut a_objs = Vec::new();
    let mut c_objs = Vec::new();
    for len in 1..=max_len {
        a_objs.extend(crate::tuples::injective_tuples(w.a_frag.size(), len));
        c_objs.extend(crate::tuples::injective_tuples(w.b_frag.size(), len));
    }
    let total = a_objs.len().saturating_mul(a_objs.len()).saturating_mul(c_objs.len());
    if total > limits.max_candidates.saturating_mul(10) {
        return Err(SemiRetractionError::Budget(total));
    }
    let results: Vec<(usize, Option<_>)> = a_objs
        .par_iter()
        .map(|b| {
            let mut scratch = FingerprintScratch::new();
            let gb: Vec<usize> = b.iter().map(|&x| w.g[x]).collect();
            let mut psis = Vec::new();
            for c in &c_objs {
                for psi in coordinate_maps(&w.b_frag, &gb, &w.b_frag, c, &mut scratch) {
                    psis.push((c, psi));
                }
            }
            let mut count = 0;
            for a in &a_objs {
                let vs = coordinate_maps(&w.a_frag, a, &w.a_frag, b, &mut scratch);
                for v in &vs {
                    let gv: FiniteMap = v.iter().map(|(&x, &y)| (w.g[x], w.g[y])).collect();
                    for (c, psi) in &psis {
                        count += 1;
                        let lhs = compose(psi, &gv).and_then(|m| phi(w, a, &m));
                        let rhs = phi(w, b, psi).and_then(|m| compose(&m, v));
                        let fc: Vec<usize> = c.iter().map(|&y| w.f[y]).collect();
                        let preserving = lhs.as_ref().is_some_and(|m| {
                            let img: Vec<usize> = a.iter().map(|x| m[x]).collect();
                            fc.iter().collect::<HashSet<_>>().is_superset(&img.iter().collect())
                                && scratch.fingerprint(&w.a_frag, a) == scratch.fingerprint(&w.a_host, &img)
                        });
                        if lhs.is_none() || lhs != rhs || !preserving {
                            return (count, Some((a.clone(), b.clone(), (*c).clone(), v.clone(), psi.clone())));
                        }
                    }
                }
            }
            (count, None)
        })
        .collect();
    let mut identities = 0;
    for (count, failure) in results {
        identities += count;
        if failure.is_some() {
            return Ok(PreadjunctionReport { objects: a_objs.len(), identities, failure });
        }
    }
    Ok(PreadjunctionReport { objects: a_objs.len(), identities, failure: None })
}

pub fn preadjunction_check(w: &SemiRetractionWitness, max_len: usize, limits: &Limits) -> Result<PreadjunctionReport, SemiRetractionError> {
    preadjunction_check_with(w, max_len, limits, phi)
}
