use serde::{Deserialize, Serialize};

/// Combinatorial caps shared by the generic operations.
///
/// Every enumeration in this crate is exponential in some parameter; these
/// caps turn an accidental blow-up into a reported error instead of a hang.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Limits {
    /// Longest tuple whose quantifier-free type may be fingerprinted.
    pub max_tuple_len: usize,
    /// Largest symbol arity accepted in a signature.
    pub max_arity: usize,
    /// Largest universe accepted by embedding/copy/automorphism enumeration.
    pub max_universe: usize,
    /// Cap on candidates examined by tuple sweeps and age enumeration.
    pub max_candidates: usize,
    /// Largest atom count for which a Boolean algebra may be exported to
    /// table form (the exported universe has `2^k` elements).
    pub max_export_atoms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_tuple_len: 6,
            max_arity: 8,
            max_universe: 64,
            max_candidates: 10_000_000,
            max_export_atoms: 5,
        }
    }
}

impl Limits {
    pub fn with_export_atoms(mut self, k: usize) -> Self {
        self.max_export_atoms = k;
        self
    }
}
