//! Finite Boolean algebras represented by subsets of an atom set.
//!
//! An element is a `u64` bitmask over at most 64 atoms. Exported table
//! structures use the mask itself as the universe label, so element `x` of
//! the algebra is element `x` of the export.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::limits::Limits;
use crate::structures::{FiniteStructure, Signature};

pub const MAX_ATOMS: usize = 64;

/// Function symbols of the exported signature, in declaration order.
pub const BA_FUNCTIONS: [(&str, usize); 5] = [("join", 2), ("meet", 2), ("not", 1), ("zero", 0), ("one", 0)];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoolAlgError {
    #[error("{atoms} atoms exceed the bound {max}")]
    TooManyAtoms { atoms: usize, max: usize },
    #[error("tuple of length {len} exceeds the bound {max}")]
    TupleTooLong { len: usize, max: usize },
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("duplicate atom name `{0}`")]
    DuplicateAtom(String),
    #[error("element {0:#x} is not a subset of the atom set")]
    NotAnElement(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSetAlgebra {
    atoms: Vec<String>,
}

/// For each sign vector `w` over the tuple (bit `i` set means the cell uses
/// `t_i`, clear means `¬t_i`), whether the cell `⋀ t_i^{w_i}` is nonempty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CellPattern {
    pub len: usize,
    pub nonempty: u64,
}

impl CellPattern {
    pub fn is_nonempty(&self, w: usize) -> bool {
        self.nonempty >> w & 1 == 1
    }
}

impl AtomSetAlgebra {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, BoolAlgError> {
        let atoms: Vec<String> = names.into_iter().map(Into::into).collect();
        if atoms.len() > MAX_ATOMS {
            return Err(BoolAlgError::TooManyAtoms { atoms: atoms.len(), max: MAX_ATOMS });
        }
        for (i, a) in atoms.iter().enumerate() {
            if atoms[..i].contains(a) {
                return Err(BoolAlgError::DuplicateAtom(a.clone()));
            }
        }
        Ok(AtomSetAlgebra { atoms })
    }

    /// Algebra on atoms named `a0..a{k-1}`.
    pub fn with_atoms(k: usize) -> Result<Self, BoolAlgError> {
        Self::new((0..k).map(|i| format!("a{i}")))
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atom_names(&self) -> &[String] {
        &self.atoms
    }

    pub fn zero(&self) -> u64 {
        0
    }

    pub fn one(&self) -> u64 {
        if self.atoms.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.atoms.len()) - 1
        }
    }

    pub fn atom(&self, i: usize) -> u64 {
        1 << i
    }

    pub fn join(&self, x: u64, y: u64) -> u64 {
        x | y
    }

    pub fn meet(&self, x: u64, y: u64) -> u64 {
        x & y
    }

    pub fn complement(&self, x: u64) -> u64 {
        !x & self.one()
    }

    /// `x ≤ y` in the lattice order, i.e. `x ∧ y = x`.
    pub fn leq(&self, x: u64, y: u64) -> bool {
        x & y == x
    }

    pub fn contains(&self, x: u64) -> bool {
        x & !self.one() == 0
    }

    pub fn element_names(&self, x: u64) -> Vec<String> {
        (0..self.atoms.len()).filter(|&i| x >> i & 1 == 1).map(|i| self.atoms[i].clone()).collect()
    }

    pub fn element_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<u64, BoolAlgError> {
        let mut x = 0;
        for n in names {
            let i = self
                .atoms
                .iter()
                .position(|a| a == n.as_ref())
                .ok_or_else(|| BoolAlgError::UnknownAtom(n.as_ref().to_string()))?;
            x |= 1 << i;
        }
        Ok(x)
    }

    fn check_elements(&self, t: &[u64]) -> Result<(), BoolAlgError> {
        match t.iter().find(|&&x| !self.contains(x)) {
            Some(&x) => Err(BoolAlgError::NotAnElement(x)),
            None => Ok(()),
        }
    }

    /// The table structure with universe `0..2^k`.
    pub fn export_structure(&self, limits: &Limits) -> Result<FiniteStructure, BoolAlgError> {
        let k = self.atoms.len();
        if k > limits.max_export_atoms {
            return Err(BoolAlgError::TooManyAtoms { atoms: k, max: limits.max_export_atoms });
        }
        let sig = ba_signature();
        let one = self.one() as usize;
        let mut b = FiniteStructure::builder(sig, 1 << k);
        b.function_from("join", |t| t[0] | t[1])
            .function_from("meet", |t| t[0] & t[1])
            .function_from("not", |t| !t[0] & one)
            .function_from("zero", |_| 0)
            .function_from("one", |_| one);
        Ok(b.build().expect("Boolean algebra tables are total"))
    }

    /// Cell pattern of `t`; equal patterns coincide with equal
    /// quantifier-free types in the Boolean-algebra signature.
    pub fn qftp_cells(&self, t: &[u64], limits: &Limits) -> Result<CellPattern, BoolAlgError> {
        let max = limits.max_tuple_len.min(6);
        if t.len() > max {
            return Err(BoolAlgError::TupleTooLong { len: t.len(), max });
        }
        self.check_elements(t)?;
        let mut nonempty = 0u64;
        for a in 0..self.atoms.len() {
            let w = t.iter().enumerate().fold(0usize, |w, (i, &x)| w | ((x >> a & 1) as usize) << i);
            nonempty |= 1 << w;
        }
        Ok(CellPattern { len: t.len(), nonempty })
    }

    /// Atoms of the subalgebra generated by `gens`: the nonempty cells, in
    /// increasing mask order.
    pub fn subalgebra_atoms(&self, gens: &[u64]) -> Vec<u64> {
        let mut cells: Vec<u64> = Vec::new();
        for a in 0..self.atoms.len() {
            let bit = 1u64 << a;
            let sign: Vec<bool> = gens.iter().map(|&x| x & bit != 0).collect();
            let cell = gens
                .iter()
                .zip(&sign)
                .fold(self.one(), |acc, (&x, &s)| acc & if s { x } else { self.complement(x) });
            if !cells.contains(&cell) {
                cells.push(cell);
            }
        }
        cells.sort_unstable();
        cells
    }
}

pub fn ba_signature() -> Signature {
    Signature::new(Vec::<(&str, usize)>::new(), BA_FUNCTIONS).expect("fixed signature is valid")
}

/// An embedding of atom-set algebras, given dually by the surjection from the
/// atoms of the larger algebra onto the atoms of the smaller one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BaEmbedding {
    pub surjection: Vec<usize>,
}

impl BaEmbedding {
    pub fn apply(&self, x: u64) -> u64 {
        self.surjection.iter().enumerate().filter(|&(_, &s)| x >> s & 1 == 1).fold(0, |acc, (a, _)| acc | 1 << a)
    }

    /// The element map `0..2^k1 -> 0..2^k2`, comparable with embeddings of
    /// the exported structures.
    pub fn element_map(&self, k1: usize) -> Vec<usize> {
        (0..1u64 << k1).map(|x| self.apply(x) as usize).collect()
    }
}

/// All embeddings `b1 -> b2`, one per surjection `atoms(b2) -> atoms(b1)`,
/// in lexicographic order of the surjection sequence.
pub fn enumerate_ba_embeddings(b1: &AtomSetAlgebra, b2: &AtomSetAlgebra) -> Vec<BaEmbedding> {
    let (k1, k2) = (b1.atom_count(), b2.atom_count());
    let mut out = Vec::new();
    if k1 > k2 || (k1 == 0 && k2 > 0) {
        return out;
    }
    let mut s = vec![0usize; k2];
    let mut hits = vec![0usize; k1];
    fn rec(i: usize, k1: usize, s: &mut Vec<usize>, hits: &mut Vec<usize>, out: &mut Vec<BaEmbedding>) {
        let k2 = s.len();
        let missing = hits.iter().filter(|&&h| h == 0).count();
        if missing > k2 - i {
            return;
        }
        if i == k2 {
            out.push(BaEmbedding { surjection: s.clone() });
            return;
        }
        for v in 0..k1 {
            s[i] = v;
            hits[v] += 1;
            rec(i + 1, k1, s, hits, out);
            hits[v] -= 1;
        }
    }
    rec(0, k1, &mut s, &mut hits, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structures::{automorphism_group, enumerate_embeddings, generated_substructure};

    #[test]
    fn export_tables() {
        let l = Limits::default();
        let b1 = AtomSetAlgebra::with_atoms(1).unwrap().export_structure(&l).unwrap();
        assert_eq!(b1.size(), 2);
        assert_eq!(b1.apply_named("not", &[0]), Some(1));
        let b2 = AtomSetAlgebra::with_atoms(2).unwrap().export_structure(&l).unwrap();
        assert_eq!(b2.apply_named("meet", &[1, 3]), Some(1));
        let (sub, _) = generated_substructure(&b2, &[1]).unwrap();
        assert_eq!(sub.size(), 4);
        let b3 = AtomSetAlgebra::with_atoms(3).unwrap().export_structure(&l).unwrap();
        assert_eq!(automorphism_group(&b3, &l).unwrap().order, 6);
        assert!(AtomSetAlgebra::with_atoms(6).unwrap().export_structure(&l).is_err());
    }

    #[test]
    fn cells_and_atoms() {
        let l = Limits::default();
        let b = AtomSetAlgebra::with_atoms(4).unwrap();
        let p01 = b.qftp_cells(&[0, b.one()], &l).unwrap();
        assert_eq!(p01.nonempty, 1 << 0b10);
        assert_ne!(p01, b.qftp_cells(&[b.one(), 0], &l).unwrap());
        assert_eq!(b.qftp_cells(&[0b0001, 0b0010], &l), b.qftp_cells(&[0b0100, 0b1000], &l));
        let b2 = AtomSetAlgebra::with_atoms(2).unwrap();
        assert_eq!(b2.subalgebra_atoms(&[0b01]), vec![0b01, 0b10]);
        assert!(b.qftp_cells(&[0; 7], &l).is_err());
    }

    #[test]
    fn ba_embeddings_match_generic_search() {
        let l = Limits::default();
        for (k1, k2, want) in [(1, 3, 1), (2, 3, 6), (3, 3, 6)] {
            let (a1, a2) = (AtomSetAlgebra::with_atoms(k1).unwrap(), AtomSetAlgebra::with_atoms(k2).unwrap());
            let fast = enumerate_ba_embeddings(&a1, &a2);
            assert_eq!(fast.len(), want);
            let mut fast_maps: Vec<Vec<usize>> = fast.iter().map(|e| e.element_map(k1)).collect();
            fast_maps.sort();
            let generic = enumerate_embeddings(&a1.export_structure(&l).unwrap(), &a2.export_structure(&l).unwrap(), &l)
                .unwrap();
            let generic_maps: Vec<Vec<usize>> = generic.into_iter().map(|e| e.map).collect();
            assert_eq!(fast_maps, generic_maps);
        }
        assert!(enumerate_ba_embeddings(&AtomSetAlgebra::with_atoms(3).unwrap(), &AtomSetAlgebra::with_atoms(2).unwrap())
            .is_empty());
    }
}
