//! Text document form of structures.
//!
//! ```json
//! {"signature": {"relations": [["<", 2]], "functions": []},
//!  "universe": 3,
//!  "relations": {"<": [[0, 1], [0, 2], [1, 2]]},
//!  "functions": {}}
//! ```
//!
//! Function tables list `[[args], value]` entries and must be exhaustive.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{FiniteStructure, Signature, StructureError};
use crate::tuples::for_each_tuple;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct SignatureDoc {
    #[serde(default)]
    pub relations: Vec<(String, usize)>,
    #[serde(default)]
    pub functions: Vec<(String, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDoc {
    pub signature: SignatureDoc,
    pub universe: usize,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default)]
    pub functions: BTreeMap<String, Vec<(Vec<usize>, usize)>>,
}

impl StructureDoc {
    pub fn from_structure(m: &FiniteStructure) -> Self {
        let sig = m.signature();
        let signature = SignatureDoc {
            relations: sig.relations().iter().map(|s| (s.name.clone(), s.arity)).collect(),
            functions: sig.functions().iter().map(|s| (s.name.clone(), s.arity)).collect(),
        };
        let mut functions = BTreeMap::new();
        for (fi, s) in sig.functions().iter().enumerate() {
            let mut table = Vec::new();
            for_each_tuple(m.size(), s.arity, |t| {
                table.push((t.to_vec(), m.apply(fi, t)));
                true
            });
            functions.insert(s.name.clone(), table);
        }
        StructureDoc { signature, universe: m.size(), relations: m.relation_map(), functions }
    }

    pub fn to_structure(&self) -> Result<FiniteStructure, StructureError> {
        let sig = Signature::new(self.signature.relations.clone(), self.signature.functions.clone())?;
        let mut b = FiniteStructure::builder(sig, self.universe);
        for (name, tuples) in &self.relations {
            for t in tuples {
                b.tuple(name, t);
            }
        }
        for (name, table) in &self.functions {
            for (args, v) in table {
                b.value(name, args, *v);
            }
        }
        b.build()
    }

    pub fn parse(text: &str) -> Result<FiniteStructure, StructureError> {
        let doc: StructureDoc = serde_json::from_str(text).map_err(|e| StructureError::Document(e.to_string()))?;
        doc.to_structure()
    }
}

impl FiniteStructure {
    pub fn to_json(&self) -> String {
        serde_json::to_string(&StructureDoc::from_structure(self)).expect("structure documents serialize")
    }
}
