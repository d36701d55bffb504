use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{Signature, StructureError};
use crate::tuples::for_each_tuple;

const DENSE_BITS_LIMIT: usize = 1 << 22;

#[derive(Clone, Debug)]
enum Membership {
    Dense(Vec<u64>),
    Sparse(HashSet<Vec<usize>>),
}

#[derive(Clone, Debug)]
struct RelationTable {
    arity: usize,
    tuples: Vec<Vec<usize>>,
    index: Membership,
}

#[derive(Clone, Debug)]
struct FunctionTable {
    arity: usize,
    values: Vec<usize>,
}

/// A finite structure on the universe `0..size`.
///
/// Relation tables are sets of tuples; function tables are total. Values are
/// immutable once built, so they can be shared freely between threads.
#[derive(Clone, Debug)]
pub struct FiniteStructure {
    sig: Signature,
    size: usize,
    relations: Vec<RelationTable>,
    functions: Vec<FunctionTable>,
}

fn flat_index(size: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

impl FiniteStructure {
    pub fn builder(sig: Signature, size: usize) -> StructureBuilder {
        let rels = vec![BTreeSet::new(); sig.relations().len()];
        let funs = sig
            .functions()
            .iter()
            .map(|f| vec![None; size.pow(f.arity as u32)])
            .collect();
        StructureBuilder { sig, size, rels, funs, errors: Vec::new() }
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn holds(&self, rel: usize, args: &[usize]) -> bool {
        let table = &self.relations[rel];
        debug_assert_eq!(args.len(), table.arity);
        match &table.index {
            Membership::Dense(bits) => {
                let i = flat_index(self.size, args);
                bits[i / 64] >> (i % 64) & 1 == 1
            }
            Membership::Sparse(set) => set.contains(args),
        }
    }

    pub fn apply(&self, fun: usize, args: &[usize]) -> usize {
        let table = &self.functions[fun];
        debug_assert_eq!(args.len(), table.arity);
        table.values[flat_index(self.size, args)]
    }

    pub fn relation_tuples(&self, rel: usize) -> &[Vec<usize>] {
        &self.relations[rel].tuples
    }

    pub fn function_values(&self, fun: usize) -> &[usize] {
        &self.functions[fun].values
    }

    pub fn relation_by_name(&self, name: &str) -> Option<&[Vec<usize>]> {
        self.sig.relation_index(name).map(|i| self.relation_tuples(i))
    }

    /// Evaluates a named relation; unknown names are reported as not holding.
    pub fn holds_named(&self, name: &str, args: &[usize]) -> bool {
        self.sig.relation_index(name).is_some_and(|i| self.holds(i, args))
    }

    pub fn apply_named(&self, name: &str, args: &[usize]) -> Option<usize> {
        self.sig.function_index(name).map(|i| self.apply(i, args))
    }

    /// The structure induced on `elements`, relabeled so that `elements[i]`
    /// becomes `i`. `elements` must be closed under every function.
    pub fn induced(&self, elements: &[usize]) -> Result<FiniteStructure, StructureError> {
        let mut pos = vec![usize::MAX; self.size];
        for (i, &e) in elements.iter().enumerate() {
            if e >= self.size {
                return Err(StructureError::ElementOutOfRange { element: e, size: self.size });
            }
            pos[e] = i;
        }
        let k = elements.len();
        let mut b = FiniteStructure::builder(self.sig.clone(), k);
        for (ri, sym) in self.sig.relations().iter().enumerate() {
            let tuples = &self.relations[ri].tuples;
            if k.pow(sym.arity as u32) <= tuples.len() {
                for_each_tuple(k, sym.arity, |t| {
                    let g: Vec<usize> = t.iter().map(|&i| elements[i]).collect();
                    if self.holds(ri, &g) {
                        b.rels[ri].insert(t.to_vec());
                    }
                    true
                });
            } else {
                for t in tuples {
                    if t.iter().all(|&x| pos[x] != usize::MAX) {
                        b.rels[ri].insert(t.iter().map(|&x| pos[x]).collect());
                    }
                }
            }
        }
        for (fi, sym) in self.sig.functions().iter().enumerate() {
            let mut ok = true;
            for_each_tuple(k, sym.arity, |t| {
                let g: Vec<usize> = t.iter().map(|&i| elements[i]).collect();
                let v = pos[self.apply(fi, &g)];
                if v == usize::MAX {
                    ok = false;
                    return false;
                }
                b.funs[fi][flat_index(k, t)] = Some(v);
                true
            });
            if !ok {
                return Err(StructureError::NotClosed { function: sym.name.clone() });
            }
        }
        b.build()
    }

    /// Reduct to the named relations and functions (in the given order).
    pub fn reduct(&self, relations: &[&str], functions: &[&str]) -> Result<FiniteStructure, StructureError> {
        let mut rel_ids = Vec::new();
        for r in relations {
            rel_ids.push(self.sig.relation_index(r).ok_or_else(|| StructureError::UnknownSymbol(r.to_string()))?);
        }
        let mut fun_ids = Vec::new();
        for f in functions {
            fun_ids.push(self.sig.function_index(f).ok_or_else(|| StructureError::UnknownSymbol(f.to_string()))?);
        }
        let sig = Signature::new(
            rel_ids.iter().map(|&i| (self.sig.relations()[i].name.clone(), self.sig.relations()[i].arity)),
            fun_ids.iter().map(|&i| (self.sig.functions()[i].name.clone(), self.sig.functions()[i].arity)),
        )?;
        let mut b = FiniteStructure::builder(sig, self.size);
        for (new, &old) in rel_ids.iter().enumerate() {
            b.rels[new] = self.relations[old].tuples.iter().cloned().collect();
        }
        for (new, &old) in fun_ids.iter().enumerate() {
            b.funs[new] = self.functions[old].values.iter().map(|&v| Some(v)).collect();
        }
        b.build()
    }

    /// Relation tuples keyed by symbol name, for serialization and display.
    pub fn relation_map(&self) -> BTreeMap<String, Vec<Vec<usize>>> {
        self.sig
            .relations()
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), self.relations[i].tuples.clone()))
            .collect()
    }

    /// Applies a relabeling `perm` (old element `x` becomes `perm[x]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<FiniteStructure, StructureError> {
        let n = self.size;
        let mut b = FiniteStructure::builder(self.sig.clone(), n);
        for (ri, table) in self.relations.iter().enumerate() {
            for t in &table.tuples {
                b.rels[ri].insert(t.iter().map(|&x| perm[x]).collect());
            }
        }
        for (fi, sym) in self.sig.functions().iter().enumerate() {
            for_each_tuple(n, sym.arity, |t| {
                let img: Vec<usize> = t.iter().map(|&x| perm[x]).collect();
                b.funs[fi][flat_index(n, &img)] = Some(perm[self.apply(fi, t)]);
                true
            });
        }
        b.build()
    }
}

/// Incremental construction of a [`FiniteStructure`]. Errors are collected
/// and reported by [`StructureBuilder::build`].
#[derive(Debug)]
pub struct StructureBuilder {
    sig: Signature,
    size: usize,
    rels: Vec<BTreeSet<Vec<usize>>>,
    funs: Vec<Vec<Option<usize>>>,
    errors: Vec<StructureError>,
}

impl StructureBuilder {
    fn check_args(&mut self, name: &str, arity: usize, args: &[usize]) -> bool {
        if args.len() != arity {
            self.errors.push(StructureError::WrongArity {
                name: name.to_string(),
                expected: arity,
                got: args.len(),
            });
            return false;
        }
        if let Some(&bad) = args.iter().find(|&&x| x >= self.size) {
            self.errors.push(StructureError::ElementOutOfRange { element: bad, size: self.size });
            return false;
        }
        true
    }

    pub fn tuple(&mut self, relation: &str, args: &[usize]) -> &mut Self {
        match self.sig.relation_index(relation) {
            Some(ri) => {
                let arity = self.sig.relations()[ri].arity;
                if self.check_args(relation, arity, args) {
                    self.rels[ri].insert(args.to_vec());
                }
            }
            None => self.errors.push(StructureError::UnknownSymbol(relation.to_string())),
        }
        self
    }

    /// Adds every tuple for which `pred` holds.
    pub fn relation_from(&mut self, relation: &str, pred: impl Fn(&[usize]) -> bool) -> &mut Self {
        let Some(ri) = self.sig.relation_index(relation) else {
            self.errors.push(StructureError::UnknownSymbol(relation.to_string()));
            return self;
        };
        let arity = self.sig.relations()[ri].arity;
        let set = &mut self.rels[ri];
        for_each_tuple(self.size, arity, |t| {
            if pred(t) {
                set.insert(t.to_vec());
            }
            true
        });
        self
    }

    pub fn value(&mut self, function: &str, args: &[usize], value: usize) -> &mut Self {
        let Some(fi) = self.sig.function_index(function) else {
            self.errors.push(StructureError::UnknownSymbol(function.to_string()));
            return self;
        };
        let arity = self.sig.functions()[fi].arity;
        if !self.check_args(function, arity, args) {
            return self;
        }
        if value >= self.size {
            self.errors.push(StructureError::ElementOutOfRange { element: value, size: self.size });
            return self;
        }
        let slot = &mut self.funs[fi][flat_index(self.size, args)];
        match *slot {
            Some(old) if old != value => self.errors.push(StructureError::FunctionConflict {
                name: function.to_string(),
                args: args.to_vec(),
            }),
            _ => *slot = Some(value),
        }
        self
    }

    /// Fills a whole function table from `f`.
    pub fn function_from(&mut self, function: &str, f: impl Fn(&[usize]) -> usize) -> &mut Self {
        let Some(fi) = self.sig.function_index(function) else {
            self.errors.push(StructureError::UnknownSymbol(function.to_string()));
            return self;
        };
        let arity = self.sig.functions()[fi].arity;
        let mut entries = Vec::new();
        for_each_tuple(self.size, arity, |t| {
            entries.push((t.to_vec(), f(t)));
            true
        });
        for (args, v) in entries {
            self.value(function, &args, v);
        }
        self
    }

    pub fn build(&mut self) -> Result<FiniteStructure, StructureError> {
        if let Some(e) = self.errors.drain(..).next() {
            return Err(e);
        }
        let size = self.size;
        let relations = self
            .rels
            .iter()
            .zip(self.sig.relations())
            .map(|(set, sym)| {
                let tuples: Vec<Vec<usize>> = set.iter().cloned().collect();
                let cells = size.checked_pow(sym.arity as u32).unwrap_or(usize::MAX);
                let index = if cells <= DENSE_BITS_LIMIT {
                    let mut bits = vec![0u64; cells.div_ceil(64)];
                    for t in &tuples {
                        let i = flat_index(size, t);
                        bits[i / 64] |= 1 << (i % 64);
                    }
                    Membership::Dense(bits)
                } else {
                    Membership::Sparse(tuples.iter().cloned().collect())
                };
                RelationTable { arity: sym.arity, tuples, index }
            })
            .collect();
        let mut functions = Vec::new();
        for (table, sym) in self.funs.iter().zip(self.sig.functions()) {
            if table.iter().any(Option::is_none) {
                return Err(StructureError::FunctionNotTotal { name: sym.name.clone() });
            }
            functions.push(FunctionTable {
                arity: sym.arity,
                values: table.iter().map(|v| v.unwrap()).collect(),
            });
        }
        Ok(FiniteStructure { sig: self.sig.clone(), size, relations, functions })
    }
}

impl PartialEq for FiniteStructure {
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig
            && self.size == other.size
            && self.relations.iter().zip(&other.relations).all(|(a, b)| a.tuples == b.tuples)
            && self.functions.iter().zip(&other.functions).all(|(a, b)| a.values == b.values)
    }
}

impl Eq for FiniteStructure {}
