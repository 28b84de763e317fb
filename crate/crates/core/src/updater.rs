//! Phase 3: write learned values into the adaptor table.
//!
//! Axioms refer to adaptors by name, so changing the table is enough for
//! every dependent axiom to pick up the new value when grounded.

use log::info;

use crate::error::{Error, Result};
use crate::io::Update;
use crate::model::{is_cardinal, Assignment, Ontology};

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateRecord {
    pub adaptor: String,
    pub old: f64,
    pub new: f64,
    /// Axioms whose grounding changes, in list order.
    pub touched_axioms: Vec<usize>,
}

impl UpdateRecord {
    pub fn to_update(&self) -> Update {
        Update {
            adaptor: self.adaptor.clone(),
            old: self.old,
            new: self.new,
        }
    }
}

pub fn apply_updates(
    ontology: &Ontology,
    updates: &Assignment,
) -> Result<(Ontology, Vec<UpdateRecord>)> {
    let mut out = ontology.clone();
    let mut records = Vec::new();
    for (id, value) in updates.iter() {
        let adaptor = ontology
            .adaptor(id)
            .ok_or_else(|| Error::UnknownAdaptor(id.to_string()))?;
        let reason = if !adaptor.domain.admits(value) {
            Some("not in the adaptor's value domain")
        } else if ontology.is_cardinality_adaptor(id) && !is_cardinal(value) {
            Some("cardinalities must be non-negative integers")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Err(Error::Domain {
                adaptor: id.to_string(),
                value,
                reason: reason.into(),
            });
        }
        info!("adaptor {id}: {} -> {value}", adaptor.current);
        records.push(UpdateRecord {
            adaptor: id.to_string(),
            old: adaptor.current,
            new: value,
            touched_axioms: ontology.dependent_axioms(id)?,
        });
        out.set_adaptor_value(id, value);
    }
    Ok((out, records))
}

/// The update list describing `assignment` relative to `ontology`.
pub fn describe_updates(ontology: &Ontology, assignment: &Assignment) -> Result<Vec<Update>> {
    assignment
        .iter()
        .map(|(id, new)| {
            let old = ontology
                .adaptor(id)
                .ok_or_else(|| Error::UnknownAdaptor(id.to_string()))?
                .current;
            Ok(Update {
                adaptor: id.to_string(),
                old,
                new,
            })
        })
        .collect()
}

/// The assignment an update list asks for.
pub fn assignment_of(updates: &[Update]) -> Assignment {
    updates.iter().map(|u| (u.adaptor.clone(), u.new)).collect()
}
