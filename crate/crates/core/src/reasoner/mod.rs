//! Consistency checking for ground ontologies.
//!
//! Every concept assertion is put in negation normal form and expanded on
//! its individual, unfolding defined names lazily. Four clash rules close a
//! branch:
//!
//! - **complement**: an individual carries both `A` and `¬A`;
//! - **data violation**: a restriction `∃f.(op, c)` on a functional `f`
//!   meets an asserted value `v` with `¬(v op c)`;
//! - **functional conflict**: a functional property has two distinct
//!   asserted values on one individual;
//! - **max-cardinality violation**: `≤n r.C` is required but more than `n`
//!   distinct asserted `r`-successors provably belong to `C`.
//!
//! Existential and at-least restrictions never clash: missing successors
//! may exist (open world). Distinct names denote distinct individuals when
//! successors are counted. No fresh individuals are generated. Disjunctions
//! are handled by branching; an individual is inconsistent only if all
//! branches close.
//!
//! Every derived fact carries the set of axioms it was derived from, so
//! each [`Clash`] names the axioms that produce it.

mod nnf;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axiom, Concept, Ontology};

pub use nnf::{to_nnf, Nnf};

/// Branches explored per individual before giving up.
pub const BRANCH_BUDGET: usize = 1 << 12;

type Deps = BTreeSet<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClashKind {
    Complement,
    DataViolation,
    FunctionalConflict,
    MaxCardViolation,
}

impl fmt::Display for ClashKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClashKind::Complement => "complement",
            ClashKind::DataViolation => "data violation",
            ClashKind::FunctionalConflict => "functional conflict",
            ClashKind::MaxCardViolation => "max-cardinality violation",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clash {
    pub individual: String,
    pub kind: ClashKind,
    /// Indices of the axioms the clash is derived from. Never empty.
    pub involved_axioms: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ClashReport {
    /// Clashes ordered by individual name, then by discovery order.
    pub clashes: Vec<Clash>,
}

impl ClashReport {
    pub fn is_consistent(&self) -> bool {
        self.clashes.is_empty()
    }
}

/// Decides consistency of a ground ontology.
pub fn check_consistency(ground: &Ontology) -> Result<ClashReport> {
    let kb = KnowledgeBase::new(ground)?;
    let mut clashes = Vec::new();
    for individual in ground.individuals() {
        clashes.extend(kb.check_individual(individual)?);
    }
    Ok(ClashReport { clashes })
}

/// Sound, incomplete membership test: true when the individual's asserted
/// facts, closed under unfolding, syntactically entail `concept`.
/// Disjunctive knowledge is not split into cases.
pub fn entails_membership(ground: &Ontology, individual: &str, concept: &Concept) -> Result<bool> {
    let kb = KnowledgeBase::new(ground)?;
    Ok(kb.entails(individual, &to_nnf(concept)?).is_some())
}

struct Definition {
    axiom: usize,
    positive: Nnf,
    negative: Nnf,
}

struct Edge<'o> {
    axiom: usize,
    role: &'o str,
    object: &'o str,
}

/// Atomic memberships that follow deterministically from an individual's
/// own assertions.
#[derive(Default)]
struct Known {
    positive: HashMap<String, Deps>,
    negative: HashMap<String, Deps>,
}

/// Indexed view of a ground ontology.
pub(crate) struct KnowledgeBase<'o> {
    definitions: HashMap<&'o str, Definition>,
    inclusions: HashMap<&'o str, Vec<(usize, Nnf)>>,
    functional: HashMap<&'o str, usize>,
    memberships: HashMap<&'o str, Vec<(usize, Nnf)>>,
    edges: HashMap<&'o str, Vec<Edge<'o>>>,
    values: HashMap<&'o str, Vec<(usize, &'o str, f64)>>,
    known: RefCell<HashMap<String, Rc<Known>>>,
}

impl<'o> KnowledgeBase<'o> {
    pub(crate) fn new(ground: &'o Ontology) -> Result<KnowledgeBase<'o>> {
        let mut kb = KnowledgeBase {
            definitions: HashMap::new(),
            inclusions: HashMap::new(),
            functional: HashMap::new(),
            memberships: HashMap::new(),
            edges: HashMap::new(),
            values: HashMap::new(),
            known: RefCell::new(HashMap::new()),
        };
        for (i, axiom) in ground.axioms().iter().enumerate() {
            match axiom {
                Axiom::Equiv { name, definition } => {
                    kb.definitions.entry(name).or_insert(Definition {
                        axiom: i,
                        positive: to_nnf(definition)?,
                        negative: to_nnf(&Concept::not(definition.clone()))?,
                    });
                }
                Axiom::SubClass { sub, sup } => match sub {
                    Concept::Atomic(name) => {
                        kb.inclusions
                            .entry(name)
                            .or_default()
                            .push((i, to_nnf(sup)?));
                    }
                    other => {
                        return Err(Error::InvalidOntology(format!(
                            "axiom {i}: unsupported complex left-hand side {other}"
                        )))
                    }
                },
                Axiom::ConceptAssertion {
                    concept,
                    individual,
                } => kb
                    .memberships
                    .entry(individual)
                    .or_default()
                    .push((i, to_nnf(concept)?)),
                Axiom::RoleAssertion {
                    role,
                    subject,
                    object,
                } => kb.edges.entry(subject).or_default().push(Edge {
                    axiom: i,
                    role,
                    object,
                }),
                Axiom::DataAssertion {
                    property,
                    individual,
                    value,
                } => kb
                    .values
                    .entry(individual)
                    .or_default()
                    .push((i, property, *value)),
                Axiom::FunctionalData(property) => {
                    kb.functional.entry(property).or_insert(i);
                }
            }
        }
        Ok(kb)
    }

    fn check_individual(&self, individual: &str) -> Result<Vec<Clash>> {
        let mut base = Branch::default();
        self.functional_conflicts(individual, &mut base.clashes);
        for (axiom, nnf) in self.memberships.get(individual).into_iter().flatten() {
            base.add(self, individual, nnf, &BTreeSet::from([*axiom]));
        }
        let mut explored = 0;
        Ok(self
            .explore(individual, base, &mut explored)?
            .unwrap_or_default())
    }

    /// Returns `None` if some branch stays open, otherwise the clashes that
    /// close the branch.
    fn explore(
        &self,
        individual: &str,
        mut branch: Branch,
        explored: &mut usize,
    ) -> Result<Option<Vec<Clash>>> {
        if !branch.clashes.is_empty() {
            return Ok(Some(branch.clashes));
        }
        let Some((alternatives, deps)) = branch.disjunctions.pop() else {
            return Ok(None);
        };
        let mut involved = deps.clone();
        let mut kind = ClashKind::Complement;
        for alternative in &alternatives {
            *explored += 1;
            if *explored > BRANCH_BUDGET {
                return Err(Error::BudgetExceeded {
                    individual: individual.to_string(),
                    limit: BRANCH_BUDGET,
                });
            }
            let mut child = branch.clone();
            child.add(self, individual, alternative, &deps);
            match self.explore(individual, child, explored)? {
                None => return Ok(None),
                Some(clashes) => {
                    kind = clashes[0].kind;
                    for c in clashes {
                        involved.extend(c.involved_axioms);
                    }
                }
            }
        }
        Ok(Some(vec![Clash {
            individual: individual.to_string(),
            kind,
            involved_axioms: involved,
        }]))
    }

    fn functional_conflicts(&self, individual: &str, out: &mut Vec<Clash>) {
        let Some(values) = self.values.get(individual) else {
            return;
        };
        let mut properties: Vec<(&str, usize)> =
            self.functional.iter().map(|(p, i)| (*p, *i)).collect();
        properties.sort();
        for (property, functional_axiom) in properties {
            let mut asserted = values.iter().filter(|(_, p, _)| *p == property);
            let Some(&(first_axiom, _, first)) = asserted.next() else {
                continue;
            };
            let mut seen = vec![first];
            for &(axiom, _, value) in asserted {
                if seen.contains(&value) {
                    continue;
                }
                seen.push(value);
                out.push(Clash {
                    individual: individual.to_string(),
                    kind: ClashKind::FunctionalConflict,
                    involved_axioms: BTreeSet::from([functional_axiom, first_axiom, axiom]),
                });
            }
        }
    }

    fn known(&self, individual: &str) -> Rc<Known> {
        if let Some(k) = self.known.borrow().get(individual) {
            return Rc::clone(k);
        }
        let mut known = Known::default();
        for (axiom, nnf) in self.memberships.get(individual).into_iter().flatten() {
            self.close(nnf, &BTreeSet::from([*axiom]), &mut known);
        }
        let known = Rc::new(known);
        self.known
            .borrow_mut()
            .insert(individual.to_string(), Rc::clone(&known));
        known
    }

    /// Deterministic closure: conjunctions and unfolding only.
    fn close(&self, nnf: &Nnf, deps: &Deps, known: &mut Known) {
        match nnf {
            Nnf::Atom(name) => {
                if known.positive.contains_key(name) {
                    return;
                }
                known.positive.insert(name.clone(), deps.clone());
                if let Some(def) = self.definitions.get(name.as_str()) {
                    self.close(&def.positive, &with(deps, def.axiom), known);
                }
                for (axiom, sup) in self.inclusions.get(name.as_str()).into_iter().flatten() {
                    self.close(sup, &with(deps, *axiom), known);
                }
            }
            Nnf::NegAtom(name) => {
                if known.negative.contains_key(name) {
                    return;
                }
                known.negative.insert(name.clone(), deps.clone());
                if let Some(def) = self.definitions.get(name.as_str()) {
                    self.close(&def.negative, &with(deps, def.axiom), known);
                }
            }
            Nnf::And(parts) => parts.iter().for_each(|p| self.close(p, deps, known)),
            _ => {}
        }
    }

    /// Proof that `individual` belongs to `nnf`, as the axioms it uses.
    pub(crate) fn entails(&self, individual: &str, nnf: &Nnf) -> Option<Deps> {
        match nnf {
            Nnf::Bottom | Nnf::AtMost { .. } => None,
            Nnf::Atom(name) => {
                if let Some(d) = self.known(individual).positive.get(name) {
                    return Some(d.clone());
                }
                let def = self.definitions.get(name.as_str())?;
                self.entails(individual, &def.positive)
                    .map(|d| with(&d, def.axiom))
            }
            Nnf::NegAtom(name) => {
                if let Some(d) = self.known(individual).negative.get(name) {
                    return Some(d.clone());
                }
                let def = self.definitions.get(name.as_str())?;
                self.entails(individual, &def.negative)
                    .map(|d| with(&d, def.axiom))
            }
            Nnf::And(parts) => {
                let mut deps = Deps::new();
                for p in parts {
                    deps.extend(self.entails(individual, p)?);
                }
                Some(deps)
            }
            Nnf::Or(parts) => parts.iter().find_map(|p| self.entails(individual, p)),
            Nnf::Exists { role, filler } => self
                .edges
                .get(individual)
                .into_iter()
                .flatten()
                .filter(|e| e.role == role)
                .find_map(|e| self.entails(e.object, filler).map(|d| with(&d, e.axiom))),
            Nnf::Data {
                property,
                comparator,
                value,
            } => self
                .values
                .get(individual)
                .into_iter()
                .flatten()
                .find(|(_, p, v)| p == property && comparator.holds(*v, *value))
                .map(|(axiom, _, _)| BTreeSet::from([*axiom])),
            Nnf::AtLeast {
                count,
                role,
                filler,
            } => {
                let qualifying = self.qualifying_successors(individual, role, filler);
                if (qualifying.len() as u64) < *count {
                    return None;
                }
                Some(
                    qualifying
                        .into_iter()
                        .take(*count as usize)
                        .flat_map(|(_, d)| d)
                        .collect(),
                )
            }
        }
    }

    /// Distinct asserted `role`-successors that provably satisfy `filler`,
    /// in assertion order, each with the axioms proving it.
    pub(crate) fn qualifying_successors(
        &self,
        individual: &str,
        role: &str,
        filler: &Nnf,
    ) -> Vec<(&'o str, Deps)> {
        let mut out: Vec<(&'o str, Deps)> = Vec::new();
        for edge in self.edges.get(individual).into_iter().flatten() {
            if edge.role != role || out.iter().any(|(o, _)| *o == edge.object) {
                continue;
            }
            if let Some(d) = self.entails(edge.object, filler) {
                out.push((edge.object, with(&d, edge.axiom)));
            }
        }
        out
    }

    /// Asserted values of `property` on `individual`, in assertion order.
    pub(crate) fn values_of(&self, individual: &str, property: &str) -> Vec<f64> {
        self.values
            .get(individual)
            .into_iter()
            .flatten()
            .filter(|(_, p, _)| *p == property)
            .map(|(_, _, v)| *v)
            .collect()
    }
}

fn with(deps: &Deps, axiom: usize) -> Deps {
    let mut out = deps.clone();
    out.insert(axiom);
    out
}

/// One branch of the expansion of a single individual.
#[derive(Clone, Default)]
struct Branch {
    positive: HashMap<String, Deps>,
    negative: HashMap<String, Deps>,
    /// Pending disjunctions, explored in the order they were met.
    disjunctions: Vec<(Vec<Nnf>, Deps)>,
    clashes: Vec<Clash>,
}

impl Branch {
    fn clash(&mut self, individual: &str, kind: ClashKind, involved_axioms: Deps) {
        self.clashes.push(Clash {
            individual: individual.to_string(),
            kind,
            involved_axioms,
        });
    }

    fn add(&mut self, kb: &KnowledgeBase<'_>, individual: &str, nnf: &Nnf, deps: &Deps) {
        match nnf {
            Nnf::Bottom => self.clash(individual, ClashKind::Complement, deps.clone()),
            Nnf::Atom(name) => {
                if self.positive.contains_key(name) {
                    return;
                }
                if let Some(other) = self.negative.get(name) {
                    let involved = deps.union(other).copied().collect();
                    self.clash(individual, ClashKind::Complement, involved);
                }
                self.positive.insert(name.clone(), deps.clone());
                if let Some(def) = kb.definitions.get(name.as_str()) {
                    self.add(kb, individual, &def.positive, &with(deps, def.axiom));
                }
                for (axiom, sup) in kb.inclusions.get(name.as_str()).into_iter().flatten() {
                    self.add(kb, individual, sup, &with(deps, *axiom));
                }
            }
            Nnf::NegAtom(name) => {
                if self.negative.contains_key(name) {
                    return;
                }
                if let Some(other) = self.positive.get(name) {
                    let involved = deps.union(other).copied().collect();
                    self.clash(individual, ClashKind::Complement, involved);
                }
                self.negative.insert(name.clone(), deps.clone());
                if let Some(def) = kb.definitions.get(name.as_str()) {
                    self.add(kb, individual, &def.negative, &with(deps, def.axiom));
                }
            }
            Nnf::And(parts) => parts.iter().for_each(|p| self.add(kb, individual, p, deps)),
            Nnf::Or(alternatives) => match alternatives.as_slice() {
                [] => self.clash(individual, ClashKind::Complement, deps.clone()),
                [only] => self.add(kb, individual, only, deps),
                _ => self
                    .disjunctions
                    .insert(0, (alternatives.clone(), deps.clone())),
            },
            Nnf::Exists { .. } | Nnf::AtLeast { .. } => {}
            Nnf::Data {
                property,
                comparator,
                value,
            } => {
                let Some(&functional_axiom) = kb.functional.get(property.as_str()) else {
                    return;
                };
                for (axiom, p, asserted) in kb.values.get(individual).into_iter().flatten() {
                    if p == property && !comparator.holds(*asserted, *value) {
                        let mut involved = with(deps, functional_axiom);
                        involved.insert(*axiom);
                        self.clash(individual, ClashKind::DataViolation, involved);
                    }
                }
            }
            Nnf::AtMost {
                count,
                role,
                filler,
            } => {
                let qualifying = kb.qualifying_successors(individual, role, filler);
                if qualifying.len() as u64 > *count {
                    let mut involved = deps.clone();
                    for (_, d) in qualifying {
                        involved.extend(d);
                    }
                    self.clash(individual, ClashKind::MaxCardViolation, involved);
                }
            }
        }
    }
}
