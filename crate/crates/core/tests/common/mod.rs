//! Brute-force oracles shared by the integration tests. None of these call
//! into the search code they are used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::Rng;
use sramsey::{FiniteStructure, Signature};

pub fn all_tuples(n: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

pub fn injective(t: &[usize]) -> bool {
    t.iter().collect::<BTreeSet<_>>().len() == t.len()
}

/// Closure under all functions, by iterating to a fixpoint.
pub fn closure(m: &FiniteStructure, gens: &[usize]) -> Vec<usize> {
    let mut set: BTreeSet<usize> = gens.iter().copied().collect();
    loop {
        let elems: Vec<usize> = set.iter().copied().collect();
        let before = set.len();
        for (fi, f) in m.signature().functions().iter().enumerate() {
            for args in all_tuples(elems.len(), f.arity) {
                let a: Vec<usize> = args.iter().map(|&i| elems[i]).collect();
                set.insert(m.apply(fi, &a));
            }
        }
        if set.len() == before {
            return set.into_iter().collect();
        }
    }
}

/// Whether `map` (defined on `dom`) preserves and reflects every relation
/// and commutes with every function on `dom`.
pub fn partial_iso(m1: &FiniteStructure, m2: &FiniteStructure, dom: &[usize], map: &dyn Fn(usize) -> usize) -> bool {
    for (ri, r) in m1.signature().relations().iter().enumerate() {
        for args in all_tuples(dom.len(), r.arity) {
            let a: Vec<usize> = args.iter().map(|&i| dom[i]).collect();
            let b: Vec<usize> = a.iter().map(|&x| map(x)).collect();
            if m1.holds(ri, &a) != m2.holds(ri, &b) {
                return false;
            }
        }
    }
    for (fi, f) in m1.signature().functions().iter().enumerate() {
        for args in all_tuples(dom.len(), f.arity) {
            let a: Vec<usize> = args.iter().map(|&i| dom[i]).collect();
            let b: Vec<usize> = a.iter().map(|&x| map(x)).collect();
            if map(m1.apply(fi, &a)) != m2.apply(fi, &b) {
                return false;
            }
        }
    }
    true
}

/// Equal quantifier-free type: `t1[i] -> t2[i]` extends to an isomorphism of
/// the generated substructures. Decided by trying every bijection.
pub fn same_type(m1: &FiniteStructure, t1: &[usize], m2: &FiniteStructure, t2: &[usize]) -> bool {
    if t1.len() != t2.len() {
        return false;
    }
    for i in 0..t1.len() {
        for j in 0..t1.len() {
            if (t1[i] == t1[j]) != (t2[i] == t2[j]) {
                return false;
            }
        }
    }
    let (c1, c2) = (closure(m1, t1), closure(m2, t2));
    if c1.len() != c2.len() {
        return false;
    }
    let mut found = false;
    permute(c2.len(), &mut |p| {
        let map = |x: usize| c2[p[c1.iter().position(|&y| y == x).unwrap()]];
        if t1.iter().zip(t2).all(|(&a, &b)| map(a) == b) && partial_iso(m1, m2, &c1, &map) {
            found = true;
        }
        !found
    });
    found
}

/// Calls `visit` on every permutation of `0..n` until it returns false.
pub fn permute(n: usize, visit: &mut dyn FnMut(&[usize]) -> bool) {
    fn rec(p: &mut Vec<usize>, used: &mut Vec<bool>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if p.len() == used.len() {
            return visit(p);
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                p.push(x);
                let go = rec(p, used, visit);
                p.pop();
                used[x] = false;
                if !go {
                    return false;
                }
            }
        }
        true
    }
    rec(&mut Vec::new(), &mut vec![false; n], visit);
}

/// All embeddings `a -> c`, by trying every injective map.
pub fn brute_embeddings(a: &FiniteStructure, c: &FiniteStructure) -> Vec<Vec<usize>> {
    let dom: Vec<usize> = (0..a.size()).collect();
    all_tuples(c.size(), a.size())
        .into_iter()
        .filter(|t| injective(t) && partial_iso(a, c, &dom, &|x| t[x]))
        .collect()
}

pub fn mixed_signature() -> Signature {
    Signature::new([("R", 2), ("U", 1)], [("f", 1)]).unwrap()
}

pub fn relational_signature() -> Signature {
    Signature::new([("R", 2), ("T", 3)], Vec::<(&str, usize)>::new()).unwrap()
}

/// Random structure: each relation tuple present with probability `p`,
/// functions uniformly random.
pub fn random_structure(rng: &mut StdRng, sig: &Signature, n: usize, p: f64) -> FiniteStructure {
    let mut b = FiniteStructure::builder(sig.clone(), n);
    for r in sig.relations() {
        for t in all_tuples(n, r.arity) {
            if rng.gen_bool(p) {
                b.tuple(&r.name, &t);
            }
        }
    }
    for f in sig.functions() {
        for t in all_tuples(n, f.arity) {
            let v = rng.gen_range(0..n);
            b.value(&f.name, &t, v);
        }
    }
    b.build().unwrap()
}
