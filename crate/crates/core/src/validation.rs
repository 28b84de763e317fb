//! Phase 1: find the adaptors whose current values make the training
//! axioms inconsistent with the ontology, and the nearest values that would
//! not.
//!
//! Every clash is shrunk to a minimal inconsistent axiom set by deletion.
//! Each adaptor referenced in that set is then probed with candidate values
//! taken from the asserted data (and their immediate neighbours). The
//! closest candidate that restores consistency is the required value.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use log::{debug, warn};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::records::{number, optional_number};
use crate::model::{is_cardinal, Axiom, Concept, NameKind, Ontology, Term};
use crate::reasoner::{check_consistency, to_nnf, KnowledgeBase};

/// Diagnostic record for one adaptor and one individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeedbackObject {
    pub adaptor: String,
    pub was_correct: bool,
    #[serde(serialize_with = "number")]
    pub current: f64,
    /// For an incorrect adaptor, the nearest value that restores
    /// consistency (absent if none does); for a correct one, the observed
    /// evidence value.
    #[serde(serialize_with = "optional_number", default)]
    pub required: Option<f64>,
    #[serde(default)]
    pub individual: Option<String>,
    /// Indices into the combined axiom list (ontology first, then training).
    #[serde(default)]
    pub clash_axioms: BTreeSet<usize>,
}

/// A minimal inconsistent axiom set that depends on `adaptor`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalInconsistency {
    pub adaptor: String,
    pub axioms: BTreeSet<usize>,
    pub individual: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Localization {
    pub inconsistencies: Vec<LocalInconsistency>,
    /// Clashes that no adaptor can repair.
    pub warnings: Vec<String>,
}

/// Checks that training axioms only use the ontology's concept, role and
/// data-property names. New individuals are allowed.
pub fn check_training_signature(original: &Ontology, training: &[Axiom]) -> Result<()> {
    let sig = original.signature();
    for (i, ax) in training.iter().enumerate() {
        let mut missing = None;
        ax.for_each_name(&mut |kind, name| {
            if kind != NameKind::Individual && missing.is_none() && !sig.contains(kind, name) {
                missing = Some(name.to_string());
            }
        });
        if let Some(name) = missing {
            return Err(Error::Signature {
                axiom: original.axioms().len() + i,
                name,
            });
        }
    }
    Ok(())
}

/// Feedback plus the clashes no adaptor takes part in.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub feedback: Vec<FeedbackObject>,
    pub unattributed: Vec<String>,
}

/// Runs the validation phase, returning feedback ordered by
/// (individual, adaptor).
pub fn validate(original: &Ontology, training: &[Axiom]) -> Result<Vec<FeedbackObject>> {
    Ok(validate_detailed(original, training)?.feedback)
}

pub fn validate_detailed(original: &Ontology, training: &[Axiom]) -> Result<Validation> {
    check_training_signature(original, training)?;
    if training.is_empty() {
        return Ok(Validation::default());
    }
    let combined = original.extended(training);
    let localization = localize(&combined)?;
    for w in &localization.warnings {
        warn!("{w}");
    }

    let mut grouped: BTreeMap<(String, String), BTreeSet<usize>> = BTreeMap::new();
    for li in localization.inconsistencies {
        grouped
            .entry((li.individual, li.adaptor))
            .or_default()
            .extend(li.axioms);
    }

    let mut feedback = Vec::new();
    for ((individual, adaptor), axioms) in &grouped {
        let current = combined
            .adaptor(adaptor)
            .ok_or_else(|| Error::UnknownAdaptor(adaptor.clone()))?
            .current;
        let set = combined.subset(axioms.iter().copied());
        let required = select_required_value(&set, adaptor, current)?;
        debug!("{adaptor} on {individual}: {current} -> {required:?}");
        feedback.push(FeedbackObject {
            adaptor: adaptor.clone(),
            was_correct: false,
            current,
            required,
            individual: Some(individual.clone()),
            clash_axioms: axioms.clone(),
        });
    }

    feedback.extend(consistent_evidence(&combined)?.into_iter().filter(|fo| {
        let key = (
            fo.individual.clone().unwrap_or_default(),
            fo.adaptor.clone(),
        );
        !grouped.contains_key(&key)
    }));
    feedback.sort_by(|a, b| (&a.individual, &a.adaptor).cmp(&(&b.individual, &b.adaptor)));
    Ok(Validation {
        feedback,
        unattributed: localization.warnings,
    })
}

/// Shrinks every clash of the grounded `combined` template to a minimal
/// inconsistent subset and attributes it to the adaptors it references.
pub fn localize(combined: &Ontology) -> Result<Localization> {
    let ground = combined.ground()?;
    let report = check_consistency(&ground)?;
    let mut out = Localization::default();
    let mut seen: HashSet<(String, BTreeSet<usize>)> = HashSet::new();
    for clash in report.clashes {
        let minimal = contract(&ground, &clash.involved_axioms)?;
        if !seen.insert((clash.individual.clone(), minimal.clone())) {
            continue;
        }
        let adaptors: BTreeSet<&str> = minimal
            .iter()
            .flat_map(|&i| combined.axioms()[i].adaptor_refs())
            .collect();
        if adaptors.is_empty() {
            out.warnings.push(format!(
                "{} clash on `{}` (axioms {:?}) does not depend on any adaptor",
                clash.kind, clash.individual, minimal
            ));
        }
        for adaptor in adaptors {
            out.inconsistencies.push(LocalInconsistency {
                adaptor: adaptor.to_string(),
                axioms: minimal.clone(),
                individual: clash.individual.clone(),
            });
        }
    }
    Ok(out)
}

/// Linear deletion-based contraction to a minimal inconsistent subset.
fn contract(ground: &Ontology, involved: &BTreeSet<usize>) -> Result<BTreeSet<usize>> {
    let mut set = involved.clone();
    if check_consistency(&ground.subset(set.iter().copied()))?.is_consistent() {
        // Defensive: the clash needs context beyond its recorded axioms.
        return Ok(set);
    }
    for axiom in involved {
        set.remove(axiom);
        if check_consistency(&ground.subset(set.iter().copied()))?.is_consistent() {
            set.insert(*axiom);
        }
    }
    Ok(set)
}

/// Data properties and roles that `adaptor` restricts anywhere in `set`.
fn restricted_relations(set: &Ontology, adaptor: &str) -> (BTreeSet<String>, BTreeSet<String>) {
    fn walk(c: &Concept, adaptor: &str, data: &mut BTreeSet<String>, card: &mut BTreeSet<String>) {
        let is_ref = |t: &Term| t.adaptor() == Some(adaptor);
        match c {
            Concept::Atomic(_) => {}
            Concept::Not(inner) => walk(inner, adaptor, data, card),
            Concept::And(parts) => parts.iter().for_each(|p| walk(p, adaptor, data, card)),
            Concept::Exists { filler, .. } => walk(filler, adaptor, data, card),
            Concept::Data {
                property, value, ..
            } => {
                if is_ref(value) {
                    data.insert(property.clone());
                }
            }
            Concept::MinCard {
                count,
                role,
                filler,
            }
            | Concept::MaxCard {
                count,
                role,
                filler,
            }
            | Concept::ExactCard {
                count,
                role,
                filler,
            } => {
                if is_ref(count) {
                    card.insert(role.clone());
                }
                walk(filler, adaptor, data, card);
            }
        }
    }
    let (mut data, mut card) = (BTreeSet::new(), BTreeSet::new());
    for ax in set.axioms() {
        for c in ax.concepts() {
            walk(c, adaptor, &mut data, &mut card);
        }
    }
    (data, card)
}

/// Candidate values for `adaptor` read off an inconsistent axiom set: all
/// asserted values of the data properties it restricts, and for every
/// individual with edges of a role whose cardinality it restricts, the
/// number of such edges. Sorted ascending, without duplicates.
pub fn compute_alternative_values(set: &Ontology, adaptor: &str) -> Result<Vec<f64>> {
    if !set.axioms().iter().any(|ax| ax.mentions_adaptor(adaptor)) {
        return Err(Error::UnknownAdaptor(adaptor.to_string()));
    }
    let (data, card) = restricted_relations(set, adaptor);
    let mut values = Vec::new();
    let mut edges: BTreeMap<(&str, &str), BTreeSet<&str>> = BTreeMap::new();
    for ax in set.axioms() {
        match ax {
            Axiom::DataAssertion {
                property, value, ..
            } if data.contains(property) => values.push(*value),
            Axiom::RoleAssertion {
                role,
                subject,
                object,
            } if card.contains(role) => {
                edges.entry((subject, role)).or_default().insert(object);
            }
            _ => {}
        }
    }
    values.extend(edges.values().map(|objects| objects.len() as f64));
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(values)
}

/// The candidate closest to `current` (ties toward the smaller value) that
/// makes `set` consistent when `adaptor` takes it, other adaptors keeping
/// their current values. Candidates are the alternative values and their
/// immediate predecessors and successors.
pub fn select_required_value(set: &Ontology, adaptor: &str, current: f64) -> Result<Option<f64>> {
    let domain = set
        .adaptor(adaptor)
        .ok_or_else(|| Error::UnknownAdaptor(adaptor.to_string()))?
        .domain;
    let cardinal = set.is_cardinality_adaptor(adaptor);
    let mut candidates: Vec<f64> = Vec::new();
    for v in compute_alternative_values(set, adaptor)? {
        let (pred, succ) = domain.neighbors(v);
        candidates.extend([pred, v, succ]);
    }
    candidates.retain(|c| domain.admits(*c) && (!cardinal || is_cardinal(*c)));
    candidates.sort_by(|a, b| {
        (a - current)
            .abs()
            .total_cmp(&(b - current).abs())
            .then(a.total_cmp(b))
    });
    candidates.dedup();

    let base = set.current_assignment();
    for c in candidates {
        let mut theta = base.clone();
        theta.insert(adaptor, c);
        if check_consistency(&set.instantiate(&theta)?)?.is_consistent() {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

/// A place where an adaptor constrains the individual a concept is
/// asserted of (not one of its successors).
enum Use {
    Data {
        adaptor: String,
        property: String,
    },
    Count {
        adaptor: String,
        role: String,
        filler: Concept,
    },
}

/// Feedback for adaptors that constrain asserted individuals without
/// causing a clash. The evidence is the asserted value of the restricted
/// data property, or the number of qualifying successors.
fn consistent_evidence(combined: &Ontology) -> Result<Vec<FeedbackObject>> {
    let mut definitions: HashMap<&str, Vec<&Concept>> = HashMap::new();
    for ax in combined.axioms() {
        match ax {
            Axiom::Equiv { name, definition } => {
                definitions.entry(name).or_default().push(definition)
            }
            Axiom::SubClass {
                sub: Concept::Atomic(name),
                sup,
            } => definitions.entry(name).or_default().push(sup),
            _ => {}
        }
    }

    fn uses<'a>(
        c: &'a Concept,
        definitions: &HashMap<&str, Vec<&'a Concept>>,
        visited: &mut HashSet<&'a str>,
        out: &mut Vec<Use>,
    ) {
        match c {
            Concept::Atomic(name) => {
                if visited.insert(name) {
                    for d in definitions.get(name.as_str()).into_iter().flatten() {
                        uses(d, definitions, visited, out);
                    }
                }
            }
            Concept::Not(inner) => uses(inner, definitions, visited, out),
            Concept::And(parts) => parts
                .iter()
                .for_each(|p| uses(p, definitions, visited, out)),
            Concept::Exists { .. } => {}
            Concept::Data {
                property,
                value: Term::Adaptor(id),
                ..
            } => out.push(Use::Data {
                adaptor: id.clone(),
                property: property.clone(),
            }),
            Concept::Data { .. } => {}
            Concept::MinCard {
                count: Term::Adaptor(id),
                role,
                filler,
            }
            | Concept::MaxCard {
                count: Term::Adaptor(id),
                role,
                filler,
            }
            | Concept::ExactCard {
                count: Term::Adaptor(id),
                role,
                filler,
            } => out.push(Use::Count {
                adaptor: id.clone(),
                role: role.clone(),
                filler: (**filler).clone(),
            }),
            Concept::MinCard { .. } | Concept::MaxCard { .. } | Concept::ExactCard { .. } => {}
        }
    }

    let ground = combined.ground()?;
    let kb = KnowledgeBase::new(&ground)?;
    let theta = combined.current_assignment();
    let mut out: BTreeMap<(String, String), FeedbackObject> = BTreeMap::new();
    for ax in combined.axioms() {
        let Axiom::ConceptAssertion {
            concept,
            individual,
        } = ax
        else {
            continue;
        };
        let mut found = Vec::new();
        uses(concept, &definitions, &mut HashSet::new(), &mut found);
        for u in found {
            let (adaptor, evidence) = match u {
                Use::Data { adaptor, property } => {
                    let value = kb.values_of(individual, &property).first().copied();
                    (adaptor, value)
                }
                Use::Count {
                    adaptor,
                    role,
                    filler,
                } => {
                    let filler = to_nnf(&filler.try_map_terms(&mut |_, t| {
                        match t {
                            Term::Adaptor(id) => theta
                                .get(id)
                                .map(Term::Literal)
                                .ok_or_else(|| Error::MissingBinding(id.clone())),
                            literal => Ok(literal.clone()),
                        }
                    })?)?;
                    let n = kb.qualifying_successors(individual, &role, &filler).len();
                    (adaptor, (n > 0).then_some(n as f64))
                }
            };
            let Some(evidence) = evidence else { continue };
            let current = combined
                .adaptor(&adaptor)
                .ok_or_else(|| Error::UnknownAdaptor(adaptor.clone()))?
                .current;
            out.entry((individual.clone(), adaptor.clone()))
                .or_insert(FeedbackObject {
                    adaptor,
                    was_correct: true,
                    current,
                    required: Some(evidence),
                    individual: Some(individual.clone()),
                    clash_axioms: BTreeSet::new(),
                });
        }
    }
    Ok(out.into_values().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_ontology, parse_training};

    const ADULT: &str = "\
adaptor X = 18
concept Person
concept LegalAdult
dataprop hasAge functional
define LegalAdult == and(Person, data(hasAge, ge, $X))
";

    fn adult() -> Ontology {
        parse_ontology(ADULT).unwrap().ontology
    }

    #[test]
    fn adult_and_minor_feedback() {
        let o = adult();
        let training = parse_training(
            "individual John\nindividual Jane\n\
             assert LegalAdult(John)\nassert hasAge(John, 16)\n\
             assert LegalAdult(Jane)\nassert hasAge(Jane, 26)\n",
            &o,
        )
        .unwrap();
        let fos = validate(&o, &training).unwrap();
        let summary: Vec<_> = fos
            .iter()
            .map(|f| {
                (
                    f.individual.as_deref().unwrap(),
                    f.was_correct,
                    f.current,
                    f.required,
                )
            })
            .collect();
        assert_eq!(
            summary,
            vec![
                ("Jane", true, 18.0, Some(26.0)),
                ("John", false, 18.0, Some(16.0)),
            ]
        );
        // Definition, functionality, and John's two assertions.
        assert_eq!(fos[1].clash_axioms, BTreeSet::from([0, 1, 2, 3]));
    }

    #[test]
    fn jo_needs_seventeen() {
        let o = adult();
        let training = parse_training(
            "individual Jo\nassert LegalAdult(Jo)\nassert hasAge(Jo, 17)\n",
            &o,
        )
        .unwrap();
        let fos = validate(&o, &training).unwrap();
        assert_eq!(fos.len(), 1);
        assert!(!fos[0].was_correct);
        assert_eq!(fos[0].required, Some(17.0));
    }

    #[test]
    fn empty_training_gives_no_feedback() {
        assert!(validate(&adult(), &[]).unwrap().is_empty());
    }

    #[test]
    fn foreign_names_are_rejected() {
        let o = adult();
        let training = vec![Axiom::ConceptAssertion {
            concept: Concept::atomic("Giant"),
            individual: "g".into(),
        }];
        assert!(matches!(
            validate(&o, &training),
            Err(Error::Signature { axiom: 2, ref name }) if name == "Giant"
        ));
    }

    #[test]
    fn alternatives_are_asserted_values() {
        let o = adult();
        let training = parse_training(
            "individual John\nassert LegalAdult(John)\nassert hasAge(John, 16)\n",
            &o,
        )
        .unwrap();
        let set = o.extended(&training);
        assert_eq!(compute_alternative_values(&set, "X").unwrap(), vec![16.0]);
        assert_eq!(select_required_value(&set, "X", 18.0).unwrap(), Some(16.0));
        let empty = o.subset([1]);
        assert_eq!(
            compute_alternative_values(&empty, "X").unwrap(),
            Vec::<f64>::new()
        );
        assert!(matches!(
            compute_alternative_values(&o.subset([0]), "X"),
            Err(Error::UnknownAdaptor(_))
        ));
    }

    #[test]
    fn edge_counts_are_alternatives() {
        let o = parse_ontology(
            "\
adaptor X2 = 3
concept Person
concept Minor
concept BusyParent
role parentOf
define BusyParent == and(Person, min($X2, parentOf, Minor))
individual p
individual a
individual b
assert BusyParent(p)
assert parentOf(p, a)
assert parentOf(p, b)
assert Minor(a)
assert Minor(b)
",
        )
        .unwrap()
        .ontology;
        assert_eq!(compute_alternative_values(&o, "X2").unwrap(), vec![2.0]);
        // Unmet lower bounds never clash.
        assert!(check_consistency(&o.ground().unwrap())
            .unwrap()
            .is_consistent());
    }

    #[test]
    fn clash_without_adaptor_is_only_a_warning() {
        let o = adult();
        let training = parse_training(
            "individual Jo\nassert hasAge(Jo, 30)\nassert hasAge(Jo, 31)\n",
            &o,
        )
        .unwrap();
        let loc = localize(&o.extended(&training)).unwrap();
        assert!(loc.inconsistencies.is_empty());
        assert_eq!(loc.warnings.len(), 1);
        assert!(validate(&o, &training).unwrap().is_empty());
    }

    #[test]
    fn unrepairable_clash_has_no_required_value() {
        // Jo is both a legal adult and not a person: no threshold helps.
        let o = adult();
        let training = parse_training(
            "individual Jo\nassert LegalAdult(Jo)\nassert not Person(Jo)\nassert hasAge(Jo, 40)\n",
            &o,
        )
        .unwrap();
        let fos = validate(&o, &training).unwrap();
        assert_eq!(fos.len(), 1);
        assert!(!fos[0].was_correct);
        assert_eq!(fos[0].required, None);

        let set = o.extended(&parse_training(
            "individual Jo\nassert and(LegalAdult, not LegalAdult)(Jo)\nassert hasAge(Jo, 40)\n",
            &o,
        )
        .unwrap());
        assert_eq!(select_required_value(&set, "X", 18.0).unwrap(), None);
    }
}
