//! Partition arrows `C → (B)^A_{r,d}` for copies and for embeddings.
//!
//! The arrow fails exactly when a bad coloring exists: an r-coloring of the
//! domain (copies of A in C, or embeddings A → C) under which every block
//! (the A-part of a copy of B, or `h ∘ Emb(A, B)` for `h ∈ Emb(B, C)`) sees at
//! least `d + 1` colors. That is a finite constraint problem; it is searched
//! by backtracking with color-symmetry breaking and per-block counting.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::Limits;
use crate::structures::{
    automorphism_group, enumerate_copies, enumerate_embeddings, FiniteStructure, StructureError,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Substructure,
    Embedding,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RamseyError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("domain of {size} exceeds the cap {max}")]
    DomainTooLarge { size: usize, max: usize },
    #[error("search budget of {0} nodes exhausted")]
    Budget(u64),
    #[error("coloring does not match the query domain")]
    DomainMismatch,
    #[error("need r >= 2 and d >= 1, got r = {r}, d = {d}")]
    BadParameters { r: usize, d: usize },
}

#[derive(Clone, Copy, Debug)]
pub struct ArrowQuery<'a> {
    pub host: &'a FiniteStructure,
    pub big: &'a FiniteStructure,
    pub small: &'a FiniteStructure,
    pub r: usize,
    pub d: usize,
    pub mode: Mode,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub mode: Mode,
    /// Sorted copy sets, or embedding maps, in canonical order.
    pub domain: Vec<Vec<usize>>,
    pub colors: Vec<usize>,
}

impl Coloring {
    pub fn color_of(&self, item: &[usize]) -> Option<usize> {
        self.domain.iter().position(|x| x == item).map(|i| self.colors[i])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Degenerate,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ArrowStats {
    pub nodes: u64,
    pub domain_size: usize,
    pub blocks: usize,
    pub exhaustive: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ArrowVerdict {
    pub outcome: Outcome,
    pub witness: Option<Coloring>,
    pub reason: Option<String>,
    pub stats: ArrowStats,
}

impl ArrowVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    /// Largest domain handled by the pruned search.
    pub max_domain: usize,
    /// Largest domain handled by brute-force `r^N` enumeration.
    pub max_exhaustive: usize,
    pub max_nodes: u64,
    /// Force brute-force enumeration instead of the pruned search.
    pub exhaustive: bool,
    pub limits: Limits,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_domain: 64,
            max_exhaustive: 20,
            max_nodes: 200_000_000,
            exhaustive: false,
            limits: Limits::default(),
        }
    }
}

/// Domain and blocks of an arrow query. Blocks are sorted, deduplicated
/// lists of domain indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowInstance {
    pub mode: Mode,
    pub domain: Vec<Vec<usize>>,
    pub blocks: Vec<Vec<usize>>,
}

impl ArrowInstance {
    pub fn build(q: &ArrowQuery, limits: &Limits) -> Result<Self, RamseyError> {
        match q.mode {
            Mode::Substructure => {
                let domain = enumerate_copies(q.small, q.host, limits)?;
                let big_copies = enumerate_copies(q.big, q.host, limits)?;
                let mut blocks: Vec<Vec<usize>> = big_copies
                    .iter()
                    .map(|s| {
                        let set: HashSet<usize> = s.iter().copied().collect();
                        (0..domain.len()).filter(|&i| domain[i].iter().all(|x| set.contains(x))).collect()
                    })
                    .collect();
                blocks.sort();
                blocks.dedup();
                Ok(ArrowInstance { mode: q.mode, domain, blocks })
            }
            Mode::Embedding => {
                let domain: Vec<Vec<usize>> =
                    enumerate_embeddings(q.small, q.host, limits)?.into_iter().map(|e| e.map).collect();
                let index: HashMap<&[usize], usize> =
                    domain.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
                let inner = enumerate_embeddings(q.small, q.big, limits)?;
                let outer = enumerate_embeddings(q.big, q.host, limits)?;
                let mut blocks: Vec<Vec<usize>> = outer
                    .iter()
                    .map(|h| {
                        let mut b: Vec<usize> = inner.iter().map(|j| index[h.compose(j).map.as_slice()]).collect();
                        b.sort_unstable();
                        b
                    })
                    .collect();
                blocks.sort();
                blocks.dedup();
                Ok(ArrowInstance { mode: q.mode, domain, blocks })
            }
        }
    }

    pub fn coloring(&self, colors: Vec<usize>) -> Coloring {
        Coloring { mode: self.mode, domain: self.domain.clone(), colors }
    }

    fn is_bad(&self, colors: &[usize], d: usize) -> bool {
        self.blocks.iter().all(|b| b.iter().map(|&i| colors[i]).collect::<BTreeSet<_>>().len() > d)
    }
}

struct Csp<'a> {
    r: usize,
    need: usize,
    blocks: &'a [Vec<usize>],
    var_blocks: Vec<Vec<usize>>,
    order: Vec<usize>,
}

#[derive(Clone)]
struct CspState {
    colors: Vec<usize>,
    counts: Vec<u32>,
    distinct: Vec<usize>,
    unassigned: Vec<usize>,
}

const UNSET: usize = usize::MAX;

impl<'a> Csp<'a> {
    fn new(n: usize, r: usize, d: usize, blocks: &'a [Vec<usize>]) -> Self {
        let mut var_blocks = vec![Vec::new(); n];
        for (bi, b) in blocks.iter().enumerate() {
            for &v in b {
                var_blocks[v].push(bi);
            }
        }
        // Fill the block with the fewest unordered variables first, so blocks
        // complete (and get checked) as early as possible.
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        loop {
            let next = blocks
                .iter()
                .map(|b| (b.iter().filter(|&&v| !placed[v]).count(), b))
                .filter(|(c, _)| *c > 0)
                .min_by_key(|(c, _)| *c);
            let Some((_, b)) = next else { break };
            for &v in b {
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
        }
        order.extend((0..n).filter(|&v| !placed[v]));
        Csp { r, need: d + 1, blocks, var_blocks, order }
    }

    fn initial(&self) -> CspState {
        CspState {
            colors: vec![UNSET; self.var_blocks.len()],
            counts: vec![0; self.blocks.len() * self.r],
            distinct: vec![0; self.blocks.len()],
            unassigned: self.blocks.iter().map(Vec::len).collect(),
        }
    }

    /// Assigns and reports whether every touched block can still reach
    /// `need` distinct colors. The assignment is applied either way.
    fn assign(&self, s: &mut CspState, v: usize, c: usize) -> bool {
        s.colors[v] = c;
        let mut ok = true;
        for &b in &self.var_blocks[v] {
            let slot = &mut s.counts[b * self.r + c];
            if *slot == 0 {
                s.distinct[b] += 1;
            }
            *slot += 1;
            s.unassigned[b] -= 1;
            let q = s.distinct[b];
            if q + s.unassigned[b].min(self.r - q) < self.need {
                ok = false;
            }
        }
        ok
    }

    fn unassign(&self, s: &mut CspState, v: usize) {
        let c = s.colors[v];
        s.colors[v] = UNSET;
        for &b in &self.var_blocks[v] {
            let slot = &mut s.counts[b * self.r + c];
            *slot -= 1;
            if *slot == 0 {
                s.distinct[b] -= 1;
            }
            s.unassigned[b] += 1;
        }
    }

    /// `used` is the number of colors used so far; a new color index may
    /// only be introduced once all smaller ones have appeared.
    fn dfs(&self, s: &mut CspState, pos: usize, used: usize, ctl: &Control) -> Result<bool, ()> {
        if pos == self.order.len() {
            return Ok(true);
        }
        if ctl.tick() {
            return Err(());
        }
        let v = self.order[pos];
        for c in 0..(used + 1).min(self.r) {
            let ok = self.assign(s, v, c);
            if ok && self.dfs(s, pos + 1, used.max(c + 1), ctl)? {
                return Ok(true);
            }
            self.unassign(s, v);
        }
        Ok(false)
    }

    /// Consistent partial assignments of the first `depth` variables, in
    /// search order, with the number of colors used so far.
    fn prefixes(&self, depth: usize) -> Vec<(Vec<usize>, usize)> {
        let mut out = Vec::new();
        let mut s = self.initial();
        let mut cur = Vec::new();
        self.collect_prefixes(&mut s, 0, 0, depth, &mut cur, &mut out);
        out
    }

    fn collect_prefixes(
        &self,
        s: &mut CspState,
        pos: usize,
        used: usize,
        depth: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, usize)>,
    ) {
        if pos == depth || pos == self.order.len() {
            out.push((cur.clone(), used));
            return;
        }
        let v = self.order[pos];
        for c in 0..(used + 1).min(self.r) {
            if self.assign(s, v, c) {
                cur.push(c);
                self.collect_prefixes(s, pos + 1, used.max(c + 1), depth, cur, out);
                cur.pop();
            }
            self.unassign(s, v);
        }
    }
}

struct Control {
    nodes: AtomicU64,
    max_nodes: u64,
    out_of_budget: AtomicBool,
}

impl Control {
    fn tick(&self) -> bool {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed);
        if n >= self.max_nodes {
            self.out_of_budget.store(true, Ordering::Relaxed);
            return true;
        }
        self.out_of_budget.load(Ordering::Relaxed)
    }
}

/// Searches for a bad coloring with the pruned backtracking search.
/// Returns the coloring (if any) and the number of nodes visited.
pub fn search_bad_coloring(
    inst: &ArrowInstance,
    r: usize,
    d: usize,
    max_nodes: u64,
) -> Result<(Option<Vec<usize>>, u64), RamseyError> {
    let n = inst.domain.len();
    let csp = Csp::new(n, r, d, &inst.blocks);
    let ctl = Control { nodes: AtomicU64::new(0), max_nodes, out_of_budget: AtomicBool::new(false) };
    let depth = n.min(8);
    let prefixes = csp.prefixes(depth);
    let found = prefixes.par_iter().find_map_first(|(prefix, used)| {
        let mut s = csp.initial();
        for (pos, &c) in prefix.iter().enumerate() {
            csp.assign(&mut s, csp.order[pos], c);
        }
        match csp.dfs(&mut s, prefix.len(), *used, &ctl) {
            Ok(true) => Some(Ok(s.colors)),
            Ok(false) => None,
            Err(()) => Some(Err(())),
        }
    });
    let nodes = ctl.nodes.load(Ordering::Relaxed);
    match found {
        Some(Ok(colors)) => Ok((Some(colors), nodes)),
        Some(Err(())) => Err(RamseyError::Budget(max_nodes)),
        None if ctl.out_of_budget.load(Ordering::Relaxed) => Err(RamseyError::Budget(max_nodes)),
        None => Ok((None, nodes)),
    }
}

/// Brute-force oracle: scans all `r^N` colorings in lexicographic order and
/// returns the first bad one.
pub fn exhaustive_bad_coloring(inst: &ArrowInstance, r: usize, d: usize, max_n: usize) -> Result<Option<Vec<usize>>, RamseyError> {
    let n = inst.domain.len();
    if n > max_n {
        return Err(RamseyError::DomainTooLarge { size: n, max: max_n });
    }
    let mut colors = vec![0usize; n];
    loop {
        if inst.is_bad(&colors, d) {
            return Ok(Some(colors));
        }
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            colors[i] += 1;
            if colors[i] < r {
                break;
            }
            colors[i] = 0;
        }
    }
}

pub fn check_arrow(q: &ArrowQuery, opts: &SearchOptions) -> Result<ArrowVerdict, RamseyError> {
    if q.r < 2 || q.d < 1 {
        return Err(RamseyError::BadParameters { r: q.r, d: q.d });
    }
    let inst = ArrowInstance::build(q, &opts.limits)?;
    let mut stats = ArrowStats { nodes: 0, domain_size: inst.domain.len(), blocks: inst.blocks.len(), exhaustive: false };
    if inst.blocks.is_empty() {
        return Ok(ArrowVerdict {
            outcome: Outcome::Degenerate,
            witness: None,
            reason: Some("no host copy of B".to_string()),
            stats,
        });
    }
    let cap = if opts.exhaustive { opts.max_exhaustive } else { opts.max_domain };
    if inst.domain.len() > cap {
        return Err(RamseyError::DomainTooLarge { size: inst.domain.len(), max: cap });
    }
    let holds = |stats| Ok(ArrowVerdict { outcome: Outcome::Holds, witness: None, reason: None, stats });
    // A block with at most d members can never see d + 1 colors.
    if q.r <= q.d || inst.blocks.iter().any(|b| b.len() <= q.d) {
        return holds(stats);
    }
    let found = if opts.exhaustive {
        stats.exhaustive = true;
        exhaustive_bad_coloring(&inst, q.r, q.d, opts.max_exhaustive)?
    } else {
        let (found, nodes) = search_bad_coloring(&inst, q.r, q.d, opts.max_nodes)?;
        stats.nodes = nodes;
        found
    };
    match found {
        None => holds(stats),
        Some(colors) => {
            debug_assert!(inst.is_bad(&colors, q.d));
            Ok(ArrowVerdict { outcome: Outcome::Fails, witness: Some(inst.coloring(colors)), reason: None, stats })
        }
    }
}

/// Recounts the colors seen by every copy of B (or every `h ∘ Emb(A, B)`)
/// directly from the structures, independently of the search code.
pub fn validate_witness(q: &ArrowQuery, c: &Coloring, limits: &Limits) -> Result<bool, RamseyError> {
    if c.mode != q.mode || c.colors.len() != c.domain.len() {
        return Err(RamseyError::DomainMismatch);
    }
    let color: HashMap<&[usize], usize> = c.domain.iter().map(Vec::as_slice).zip(c.colors.iter().copied()).collect();
    let lookup = |item: &[usize]| color.get(item).copied().ok_or(RamseyError::DomainMismatch);
    match q.mode {
        Mode::Substructure => {
            let expected = enumerate_copies(q.small, q.host, limits)?;
            if expected.len() != c.domain.len() || expected.iter().any(|x| !color.contains_key(x.as_slice())) {
                return Err(RamseyError::DomainMismatch);
            }
            let bigs = enumerate_copies(q.big, q.host, limits)?;
            if bigs.is_empty() {
                return Ok(false);
            }
            for s in bigs {
                let sub = q.host.induced(&s)?;
                let mut seen = BTreeSet::new();
                for inner in enumerate_copies(q.small, &sub, limits)? {
                    let mut outer: Vec<usize> = inner.iter().map(|&i| s[i]).collect();
                    outer.sort_unstable();
                    seen.insert(lookup(&outer)?);
                }
                if seen.len() <= q.d {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Mode::Embedding => {
            let expected = enumerate_embeddings(q.small, q.host, limits)?;
            if expected.len() != c.domain.len() || expected.iter().any(|e| !color.contains_key(e.map.as_slice())) {
                return Err(RamseyError::DomainMismatch);
            }
            let inner = enumerate_embeddings(q.small, q.big, limits)?;
            let outer = enumerate_embeddings(q.big, q.host, limits)?;
            if outer.is_empty() {
                return Ok(false);
            }
            for h in &outer {
                let mut seen = BTreeSet::new();
                for j in &inner {
                    let hj: Vec<usize> = j.map.iter().map(|&x| h.map[x]).collect();
                    seen.insert(lookup(&hj)?);
                }
                if seen.len() <= q.d {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Verdicts for `d = 1..=r` in order; stops at the first `d` that holds.
/// Returns the minimal `d` (if the query is not degenerate) and the sweep.
pub fn minimal_d(
    host: &FiniteStructure,
    big: &FiniteStructure,
    small: &FiniteStructure,
    r: usize,
    mode: Mode,
    opts: &SearchOptions,
) -> Result<(Option<usize>, Vec<ArrowVerdict>), RamseyError> {
    let mut sweep = Vec::new();
    for d in 1..=r {
        let v = check_arrow(&ArrowQuery { host, big, small, r, d, mode }, opts)?;
        let outcome = v.outcome;
        sweep.push(v);
        match outcome {
            Outcome::Holds => return Ok((Some(d), sweep)),
            Outcome::Degenerate => return Ok((None, sweep)),
            Outcome::Fails => {}
        }
    }
    unreachable!("the arrow holds once d reaches r")
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeCell {
    pub big: usize,
    pub r: usize,
    /// Least `d` achieved by some host in the pool.
    pub min_d: Option<usize>,
    /// Pool index of the first host achieving `min_d`.
    pub host: Option<usize>,
    /// Bad coloring on that host refuting `min_d - 1`, when `min_d > 1`.
    pub witness: Option<Coloring>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub mode: Mode,
    pub cells: Vec<DegreeCell>,
    /// Largest `min_d` over all cells; evidence for the supplied pools only.
    pub pool_bound: Option<usize>,
}

pub fn degree_evidence(
    small: &FiniteStructure,
    big_pool: &[FiniteStructure],
    host_pool: &[FiniteStructure],
    r_max: usize,
    mode: Mode,
    opts: &SearchOptions,
) -> DegreeReport {
    let mut cells = Vec::new();
    for (bi, big) in big_pool.iter().enumerate() {
        for r in 2..=r_max {
            let mut cell = DegreeCell { big: bi, r, min_d: None, host: None, witness: None, error: None };
            for (ci, host) in host_pool.iter().enumerate() {
                match minimal_d(host, big, small, r, mode, opts) {
                    Ok((Some(d), sweep)) => {
                        if cell.min_d.map_or(true, |m| d < m) {
                            cell.min_d = Some(d);
                            cell.host = Some(ci);
                            cell.witness = sweep.iter().rev().find_map(|v| v.witness.clone());
                        }
                    }
                    Ok((None, _)) => {}
                    Err(e) => {
                        cell.error.get_or_insert_with(|| format!("host {ci}: {e}"));
                    }
                }
            }
            cells.push(cell);
        }
    }
    let pool_bound = cells.iter().filter_map(|c| c.min_d).max();
    DegreeReport { mode, cells, pool_bound }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoDegreesReport {
    pub d_sub: Option<usize>,
    pub d_emb: Option<usize>,
    pub aut_order: usize,
    /// `d_sub ≤ d_emb ≤ |Aut(A)| · d_sub` on this instance.
    pub consistent: bool,
}

pub fn two_degrees_check(
    small: &FiniteStructure,
    big: &FiniteStructure,
    host: &FiniteStructure,
    r: usize,
    opts: &SearchOptions,
) -> Result<TwoDegreesReport, RamseyError> {
    let (d_sub, _) = minimal_d(host, big, small, r, Mode::Substructure, opts)?;
    let (d_emb, _) = minimal_d(host, big, small, r, Mode::Embedding, opts)?;
    let aut_order = automorphism_group(small, &opts.limits)?.order;
    let consistent = match (d_sub, d_emb) {
        (Some(s), Some(e)) => s <= e && e <= aut_order * s,
        (None, None) => true,
        _ => false,
    };
    Ok(TwoDegreesReport { d_sub, d_emb, aut_order, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::Signature;

    fn chain(n: usize) -> FiniteStructure {
        let sig = Signature::new([("<", 2)], Vec::<(&str, usize)>::new()).unwrap();
        FiniteStructure::builder(sig, n).relation_from("<", |t| t[0] < t[1]).build().unwrap()
    }

    #[test]
    fn pairs_in_chains() {
        let opts = SearchOptions::default();
        let (c6, c5, b, a) = (chain(6), chain(5), chain(3), chain(2));
        let q6 = ArrowQuery { host: &c6, big: &b, small: &a, r: 2, d: 1, mode: Mode::Substructure };
        assert!(check_arrow(&q6, &opts).unwrap().holds());
        let q5 = ArrowQuery { host: &c5, ..q6 };
        let v = check_arrow(&q5, &opts).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        assert!(validate_witness(&q5, v.witness.as_ref().unwrap(), &opts.limits).unwrap());
        let constant = ArrowInstance::build(&q6, &opts.limits).unwrap().coloring(vec![0; 15]);
        assert!(!validate_witness(&q6, &constant, &opts.limits).unwrap());
    }

    #[test]
    fn same_small_and_big_holds() {
        let opts = SearchOptions::default();
        let (c, a) = (chain(4), chain(2));
        let q = ArrowQuery { host: &c, big: &a, small: &a, r: 3, d: 1, mode: Mode::Substructure };
        assert!(check_arrow(&q, &opts).unwrap().holds());
        let q = ArrowQuery { host: &a, big: &c, small: &a, r: 2, d: 1, mode: Mode::Substructure };
        assert_eq!(check_arrow(&q, &opts).unwrap().outcome, Outcome::Degenerate);
    }

    #[test]
    fn exhaustive_agrees_with_search() {
        let opts = SearchOptions::default();
        for n in 3..=6 {
            let (c, b, a) = (chain(n), chain(3), chain(2));
            let q = ArrowQuery { host: &c, big: &b, small: &a, r: 2, d: 1, mode: Mode::Substructure };
            let inst = ArrowInstance::build(&q, &opts.limits).unwrap();
            let brute = exhaustive_bad_coloring(&inst, 2, 1, 20).unwrap();
            let (pruned, _) = search_bad_coloring(&inst, 2, 1, u64::MAX).unwrap();
            assert_eq!(brute.is_some(), pruned.is_some(), "n = {n}");
        }
    }
}
