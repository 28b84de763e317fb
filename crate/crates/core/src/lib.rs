//! Ontologies whose vague concepts carry adjustable numeric thresholds.
//!
//! The pipeline runs in three phases:
//!
//! 1. [`validation`] combines an ontology with training axioms, localises
//!    every inconsistency to the adaptors it depends on and proposes the
//!    closest value that removes it.
//! 2. [`learning`] aggregates that feedback into one new value per adaptor.
//! 3. [`updater`] writes the new values into the adaptor table. Every axiom
//!    referencing an adaptor picks up the value when it is grounded.
//!
//! Consistency is decided by [`reasoner`], a clash detector for a small
//! description-logic fragment under the open-world and unique-name
//! assumptions.

pub mod error;
pub mod experiments;
pub mod io;
pub mod learning;
pub mod model;
pub mod reasoner;
pub mod updater;
pub mod validation;

pub use error::{Error, Result};
pub use model::{
    Adaptor, Assignment, Axiom, Comparator, Concept, DomainKind, Ontology, Signature, Term,
    ValueDomain,
};
