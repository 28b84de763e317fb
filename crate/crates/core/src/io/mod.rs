//! Text formats: the `.vago` ontology language, feedback and update JSON,
//! and trajectory CSV.

pub mod dsl;
pub mod records;

pub use dsl::{
    parse_ontology, parse_ontology_in, parse_training, parse_training_in, read_ontology,
    read_training, serialize_ontology, serialize_training, Diagnostic, Parsed, SourceSpan,
};
pub use records::{
    read_feedback, read_trajectory, read_updates, write_feedback, write_trajectory, write_updates,
    Update,
};
