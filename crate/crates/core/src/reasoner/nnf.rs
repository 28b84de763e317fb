//! Negation normal form for ground concepts.

use crate::error::{Error, Result};
use crate::model::{is_cardinal, Comparator, Concept, Term};

/// A ground concept with negation pushed down to atomic names.
///
/// Defined names stay folded; the reasoner unfolds them on demand.
#[derive(Debug, Clone, PartialEq)]
pub enum Nnf {
    /// Unsatisfiable, from negating `≥0 r.C`.
    Bottom,
    Atom(String),
    NegAtom(String),
    And(Vec<Nnf>),
    /// Disjunction; only produced by negating a conjunction or an equality.
    Or(Vec<Nnf>),
    Exists {
        role: String,
        filler: Box<Nnf>,
    },
    Data {
        property: String,
        comparator: Comparator,
        value: f64,
    },
    AtLeast {
        count: u64,
        role: String,
        filler: Box<Nnf>,
    },
    AtMost {
        count: u64,
        role: String,
        filler: Box<Nnf>,
    },
}

/// Converts a ground concept to negation normal form.
///
/// `¬≥n r.C` becomes `≤(n-1) r.C`, `¬≤n r.C` becomes `≥(n+1) r.C`,
/// `¬∃r.C` becomes `≤0 r.C` and a negated datatype restriction flips its
/// comparator. The flip reads `¬∃p.(op, v)` as "the value of `p` fails
/// `op v`", which is exact for functional properties.
pub fn to_nnf(concept: &Concept) -> Result<Nnf> {
    convert(concept, false)
}

fn convert(concept: &Concept, negated: bool) -> Result<Nnf> {
    Ok(match (concept, negated) {
        (Concept::Atomic(name), false) => Nnf::Atom(name.clone()),
        (Concept::Atomic(name), true) => Nnf::NegAtom(name.clone()),
        (Concept::Not(inner), _) => convert(inner, !negated)?,
        (Concept::And(parts), false) => Nnf::And(
            parts
                .iter()
                .map(|p| convert(p, false))
                .collect::<Result<_>>()?,
        ),
        (Concept::And(parts), true) => Nnf::Or(
            parts
                .iter()
                .map(|p| convert(p, true))
                .collect::<Result<_>>()?,
        ),
        (Concept::Exists { role, filler }, false) => Nnf::Exists {
            role: role.clone(),
            filler: Box::new(convert(filler, false)?),
        },
        (Concept::Exists { role, filler }, true) => Nnf::AtMost {
            count: 0,
            role: role.clone(),
            filler: Box::new(convert(filler, false)?),
        },
        (
            Concept::Data {
                property,
                comparator,
                value,
            },
            _,
        ) => {
            let value = literal(value)?;
            let data = |comparator| Nnf::Data {
                property: property.clone(),
                comparator,
                value,
            };
            match (negated, comparator.complement()) {
                (false, _) => data(*comparator),
                (true, Some(flipped)) => data(flipped),
                (true, None) => Nnf::Or(vec![data(Comparator::Lt), data(Comparator::Gt)]),
            }
        }
        (
            Concept::MinCard {
                count,
                role,
                filler,
            },
            _,
        ) => {
            let n = cardinal(count)?;
            let filler = convert(filler, false)?;
            if negated {
                not_at_least(n, role, filler)
            } else {
                at_least(n, role, filler)
            }
        }
        (
            Concept::MaxCard {
                count,
                role,
                filler,
            },
            _,
        ) => {
            let n = cardinal(count)?;
            let filler = convert(filler, false)?;
            if negated {
                at_least(n + 1, role, filler)
            } else {
                at_most(n, role, filler)
            }
        }
        (
            Concept::ExactCard {
                count,
                role,
                filler,
            },
            _,
        ) => {
            let n = cardinal(count)?;
            let filler = convert(filler, false)?;
            if negated {
                match not_at_least(n, role, filler.clone()) {
                    Nnf::Bottom => at_least(n + 1, role, filler),
                    below => Nnf::Or(vec![below, at_least(n + 1, role, filler)]),
                }
            } else {
                Nnf::And(vec![
                    at_least(n, role, filler.clone()),
                    at_most(n, role, filler),
                ])
            }
        }
    })
}

fn at_least(count: u64, role: &str, filler: Nnf) -> Nnf {
    Nnf::AtLeast {
        count,
        role: role.to_string(),
        filler: Box::new(filler),
    }
}

fn at_most(count: u64, role: &str, filler: Nnf) -> Nnf {
    Nnf::AtMost {
        count,
        role: role.to_string(),
        filler: Box::new(filler),
    }
}

fn not_at_least(count: u64, role: &str, filler: Nnf) -> Nnf {
    match count {
        0 => Nnf::Bottom,
        n => at_most(n - 1, role, filler),
    }
}

fn literal(term: &Term) -> Result<f64> {
    match term {
        Term::Literal(v) => Ok(*v),
        Term::Adaptor(id) => Err(Error::NotGround(id.clone())),
    }
}

fn cardinal(term: &Term) -> Result<u64> {
    let v = literal(term)?;
    if !is_cardinal(v) {
        return Err(Error::InvalidOntology(format!(
            "cardinality {v} is not a non-negative integer"
        )));
    }
    Ok(v as u64)
}
