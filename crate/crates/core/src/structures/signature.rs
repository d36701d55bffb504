use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::StructureError;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// Relation and function symbols with arities. Declaration order matters: it
/// fixes the order in which fingerprints list tables and in which closures
/// apply functions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Signature {
    relations: Vec<Symbol>,
    functions: Vec<Symbol>,
}

impl Signature {
    pub const DEFAULT_MAX_ARITY: usize = 8;

    pub fn new<R, F, S>(relations: R, functions: F) -> Result<Self, StructureError>
    where
        R: IntoIterator<Item = (S, usize)>,
        F: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        Self::with_arity_limit(relations, functions, Self::DEFAULT_MAX_ARITY)
    }

    pub fn with_arity_limit<R, F, S>(
        relations: R,
        functions: F,
        max_arity: usize,
    ) -> Result<Self, StructureError>
    where
        R: IntoIterator<Item = (S, usize)>,
        F: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let relations: Vec<Symbol> = relations
            .into_iter()
            .map(|(n, arity)| Symbol { name: n.into(), arity })
            .collect();
        let functions: Vec<Symbol> = functions
            .into_iter()
            .map(|(n, arity)| Symbol { name: n.into(), arity })
            .collect();
        let mut names = BTreeSet::new();
        for s in relations.iter().chain(&functions) {
            if !names.insert(s.name.as_str()) {
                return Err(StructureError::DuplicateSymbol(s.name.clone()));
            }
            if s.arity > max_arity {
                return Err(StructureError::ArityTooLarge {
                    name: s.name.clone(),
                    arity: s.arity,
                    max: max_arity,
                });
            }
        }
        if let Some(r) = relations.iter().find(|r| r.arity == 0) {
            return Err(StructureError::ZeroArityRelation(r.name.clone()));
        }
        Ok(Signature { relations, functions })
    }

    /// The empty signature (pure sets).
    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn relations(&self) -> &[Symbol] {
        &self.relations
    }

    pub fn functions(&self) -> &[Symbol] {
        &self.functions
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|s| s.name == name)
    }

    pub fn function_index(&self, name: &str) -> Option<usize> {
        self.functions.iter().position(|s| s.name == name)
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }
}
