//! Canonical codes for quantifier-free types.
//!
//! The fingerprint of a tuple describes the substructure generated by the
//! tuple, with the tuple's coordinates marked. Local indices are assigned in
//! term-discovery order: the distinct generators first (in tuple order), then
//! breadth-first rounds of function application, functions in signature
//! order and argument tuples in lexicographic order of local indices. Two
//! tuples get equal codes exactly when the coordinatewise map extends to an
//! isomorphism of the generated substructures.

use serde::Serialize;

use super::{FiniteStructure, StructureError};
use crate::limits::Limits;
use crate::tuples::{for_each_tuple, for_each_tuple_touching};

const UNSEEN: u32 = u32::MAX;

/// Code layout: `[gen_count, local_size, generator_map.., function tables..,
/// (relation tuple count, flattened sorted local tuples)..]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct QfFingerprint {
    code: Vec<u32>,
}

impl QfFingerprint {
    pub fn generator_count(&self) -> usize {
        self.code[0] as usize
    }

    pub fn local_size(&self) -> usize {
        self.code[1] as usize
    }

    /// Local index of each generator position.
    pub fn generator_map(&self) -> Vec<usize> {
        self.code[2..2 + self.generator_count()].iter().map(|&x| x as usize).collect()
    }

    pub fn code(&self) -> &[u32] {
        &self.code
    }

    /// Flat little-endian byte form; byte equality coincides with equality.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.code.iter().flat_map(|x| x.to_le_bytes()).collect()
    }

    pub(crate) fn from_code(code: &[u32]) -> Self {
        QfFingerprint { code: code.to_vec() }
    }
}

/// Reusable buffers for closure and fingerprint computation. One scratch per
/// thread; it adapts to whatever structure it is handed.
#[derive(Debug, Default)]
pub struct FingerprintScratch {
    pos: Vec<u32>,
    local: Vec<usize>,
    gargs: Vec<usize>,
    code: Vec<u32>,
    buf: Vec<Vec<u32>>,
}

impl FingerprintScratch {
    pub fn new() -> Self {
        Self::default()
    }

    fn clear_positions(&mut self) {
        for &x in &self.local {
            self.pos[x] = UNSEEN;
        }
        self.local.clear();
    }

    /// Closes `gens` under all functions of `m` and returns the elements in
    /// discovery order. Elements of `gens` must lie in the universe.
    pub fn closure(&mut self, m: &FiniteStructure, gens: &[usize]) -> &[usize] {
        self.clear_positions();
        if self.pos.len() < m.size() {
            self.pos.resize(m.size(), UNSEEN);
        }
        for &g in gens {
            if self.pos[g] == UNSEEN {
                self.pos[g] = self.local.len() as u32;
                self.local.push(g);
            }
        }
        let mut processed = 0;
        loop {
            let l = self.local.len();
            for (fi, sym) in m.signature().functions().iter().enumerate() {
                let (pos, local, gargs) = (&mut self.pos, &mut self.local, &mut self.gargs);
                for_each_tuple_touching(l, sym.arity, processed, &mut |t| {
                    gargs.clear();
                    gargs.extend(t.iter().map(|&i| local[i]));
                    let v = m.apply(fi, gargs);
                    if pos[v] == UNSEEN {
                        pos[v] = local.len() as u32;
                        local.push(v);
                    }
                    true
                });
            }
            processed = l;
            if self.local.len() == l {
                break;
            }
        }
        &self.local
    }

    /// Fingerprint code of `t` in `m`, without limit checks. The slice is
    /// valid until the next call on this scratch.
    pub fn compute(&mut self, m: &FiniteStructure, t: &[usize]) -> &[u32] {
        self.closure(m, t);
        let l = self.local.len();
        self.code.clear();
        self.code.push(t.len() as u32);
        self.code.push(l as u32);
        for &x in t {
            self.code.push(self.pos[x]);
        }
        for (fi, sym) in m.signature().functions().iter().enumerate() {
            let (pos, local, gargs, code) = (&self.pos, &self.local, &mut self.gargs, &mut self.code);
            for_each_tuple(l, sym.arity, |args| {
                gargs.clear();
                gargs.extend(args.iter().map(|&i| local[i]));
                code.push(pos[m.apply(fi, gargs)]);
                true
            });
        }
        for (ri, sym) in m.signature().relations().iter().enumerate() {
            let global = m.relation_tuples(ri);
            let count_at = self.code.len();
            self.code.push(0);
            let mut count = 0u32;
            let dense_cost = l.checked_pow(sym.arity as u32).unwrap_or(usize::MAX);
            if dense_cost <= global.len().max(16) {
                let (local, gargs, code) = (&self.local, &mut self.gargs, &mut self.code);
                for_each_tuple(l, sym.arity, |args| {
                    gargs.clear();
                    gargs.extend(args.iter().map(|&i| local[i]));
                    if m.holds(ri, gargs) {
                        code.extend(args.iter().map(|&i| i as u32));
                        count += 1;
                    }
                    true
                });
            } else {
                self.buf.clear();
                for tup in global {
                    if tup.iter().all(|&x| self.pos[x] != UNSEEN) {
                        self.buf.push(tup.iter().map(|&x| self.pos[x]).collect());
                    }
                }
                self.buf.sort_unstable();
                for tup in &self.buf {
                    self.code.extend_from_slice(tup);
                }
                count = self.buf.len() as u32;
            }
            self.code[count_at] = count;
        }
        &self.code
    }

    pub fn fingerprint(&mut self, m: &FiniteStructure, t: &[usize]) -> QfFingerprint {
        QfFingerprint::from_code(self.compute(m, t))
    }
}

pub(crate) fn check_tuple(m: &FiniteStructure, t: &[usize], limits: &Limits) -> Result<(), StructureError> {
    if t.len() > limits.max_tuple_len {
        return Err(StructureError::TupleTooLong { len: t.len(), max: limits.max_tuple_len });
    }
    if let Some(&bad) = t.iter().find(|&&x| x >= m.size()) {
        return Err(StructureError::ElementOutOfRange { element: bad, size: m.size() });
    }
    Ok(())
}

/// Fingerprint of the quantifier-free type of `t` in `m`.
pub fn qftp_fingerprint(m: &FiniteStructure, t: &[usize], limits: &Limits) -> Result<QfFingerprint, StructureError> {
    check_tuple(m, t, limits)?;
    Ok(FingerprintScratch::new().fingerprint(m, t))
}
