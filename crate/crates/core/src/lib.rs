//! Finite structural Ramsey theory: structures, quantifier-free types,
//! partition arrows, semi-retractions and Boolean-algebra encodings.

pub mod boolalg;
pub mod constructions;
pub mod indiscernibles;
pub mod limits;
pub mod ramsey;
pub mod semiretraction;
pub mod structures;
pub mod tuples;

pub use limits::Limits;
pub use structures::{
    Embedding, FiniteStructure, QfFingerprint, Signature, StructureError,
};
