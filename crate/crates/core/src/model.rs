//! The description-logic fragment, adaptors and grounding.
//!
//! Numeric slots of a concept (datatype thresholds and cardinalities) hold a
//! [`Term`], which is either a literal or a reference to a named adaptor. An
//! axiom that mentions an adaptor is a template; [`Ontology::instantiate`]
//! replaces every reference by the value an [`Assignment`] binds to it.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Comparison operator of a datatype restriction `∃p.(op, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Comparator {
    Lt,
    Le,
    Ge,
    Gt,
    Eq,
}

impl Comparator {
    pub const ALL: [Comparator; 5] = [
        Comparator::Lt,
        Comparator::Le,
        Comparator::Ge,
        Comparator::Gt,
        Comparator::Eq,
    ];

    /// Whether `value op bound` holds.
    pub fn holds(self, value: f64, bound: f64) -> bool {
        match self {
            Comparator::Lt => value < bound,
            Comparator::Le => value <= bound,
            Comparator::Ge => value >= bound,
            Comparator::Gt => value > bound,
            Comparator::Eq => value == bound,
        }
    }

    /// The complementary comparator; `Eq` has none (its complement is a disjunction).
    pub fn complement(self) -> Option<Comparator> {
        match self {
            Comparator::Lt => Some(Comparator::Ge),
            Comparator::Le => Some(Comparator::Gt),
            Comparator::Ge => Some(Comparator::Lt),
            Comparator::Gt => Some(Comparator::Le),
            Comparator::Eq => None,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Comparator::Lt => "lt",
            Comparator::Le => "le",
            Comparator::Ge => "ge",
            Comparator::Gt => "gt",
            Comparator::Eq => "eq",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Comparator> {
        Comparator::ALL.into_iter().find(|c| c.keyword() == word)
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "≤",
            Comparator::Ge => "≥",
            Comparator::Gt => ">",
            Comparator::Eq => "=",
        }
    }
}

/// A numeric slot: either a literal or an adaptor reference.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Literal(f64),
    Adaptor(String),
}

impl Term {
    pub fn adaptor(&self) -> Option<&str> {
        match self {
            Term::Adaptor(id) => Some(id),
            Term::Literal(_) => None,
        }
    }

    pub fn literal(&self) -> Option<f64> {
        match self {
            Term::Literal(v) => Some(*v),
            Term::Adaptor(_) => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Literal(v) => write!(f, "{}", format_number(*v)),
            Term::Adaptor(id) => write!(f, "${id}"),
        }
    }
}

/// Where a term sits inside a concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermPosition {
    /// Threshold of a datatype restriction.
    Datatype,
    /// Count of a cardinality restriction.
    Cardinality,
}

/// Concept expressions of the supported fragment.
#[derive(Debug, Clone, PartialEq)]
pub enum Concept {
    Atomic(String),
    Not(Box<Concept>),
    /// Conjunction of at least two concepts.
    And(Vec<Concept>),
    Exists {
        role: String,
        filler: Box<Concept>,
    },
    /// `∃property.(comparator, value)`
    Data {
        property: String,
        comparator: Comparator,
        value: Term,
    },
    MinCard {
        count: Term,
        role: String,
        filler: Box<Concept>,
    },
    MaxCard {
        count: Term,
        role: String,
        filler: Box<Concept>,
    },
    /// Shorthand for the conjunction of `MinCard` and `MaxCard` with the same count.
    ExactCard {
        count: Term,
        role: String,
        filler: Box<Concept>,
    },
}

impl Concept {
    pub fn atomic(name: impl Into<String>) -> Concept {
        Concept::Atomic(name.into())
    }

    #[allow(clippy::should_implement_trait)] // a constructor, like `exists`
    pub fn not(inner: Concept) -> Concept {
        Concept::Not(Box::new(inner))
    }

    pub fn exists(role: impl Into<String>, filler: Concept) -> Concept {
        Concept::Exists {
            role: role.into(),
            filler: Box::new(filler),
        }
    }

    pub fn data(property: impl Into<String>, comparator: Comparator, value: Term) -> Concept {
        Concept::Data {
            property: property.into(),
            comparator,
            value,
        }
    }

    pub fn min_card(count: Term, role: impl Into<String>, filler: Concept) -> Concept {
        Concept::MinCard {
            count,
            role: role.into(),
            filler: Box::new(filler),
        }
    }

    pub fn max_card(count: Term, role: impl Into<String>, filler: Concept) -> Concept {
        Concept::MaxCard {
            count,
            role: role.into(),
            filler: Box::new(filler),
        }
    }

    pub fn exact_card(count: Term, role: impl Into<String>, filler: Concept) -> Concept {
        Concept::ExactCard {
            count,
            role: role.into(),
            filler: Box::new(filler),
        }
    }

    /// Visits every numeric term together with its position.
    pub fn for_each_term<'a>(&'a self, f: &mut impl FnMut(TermPosition, &'a Term)) {
        match self {
            Concept::Atomic(_) => {}
            Concept::Not(inner) => inner.for_each_term(f),
            Concept::And(parts) => parts.iter().for_each(|p| p.for_each_term(f)),
            Concept::Exists { filler, .. } => filler.for_each_term(f),
            Concept::Data { value, .. } => f(TermPosition::Datatype, value),
            Concept::MinCard { count, filler, .. }
            | Concept::MaxCard { count, filler, .. }
            | Concept::ExactCard { count, filler, .. } => {
                f(TermPosition::Cardinality, count);
                filler.for_each_term(f);
            }
        }
    }

    /// Rebuilds the concept with every term passed through `f`.
    pub fn try_map_terms(
        &self,
        f: &mut impl FnMut(TermPosition, &Term) -> Result<Term>,
    ) -> Result<Concept> {
        Ok(match self {
            Concept::Atomic(name) => Concept::Atomic(name.clone()),
            Concept::Not(inner) => Concept::Not(Box::new(inner.try_map_terms(f)?)),
            Concept::And(parts) => Concept::And(
                parts
                    .iter()
                    .map(|p| p.try_map_terms(f))
                    .collect::<Result<_>>()?,
            ),
            Concept::Exists { role, filler } => Concept::Exists {
                role: role.clone(),
                filler: Box::new(filler.try_map_terms(f)?),
            },
            Concept::Data {
                property,
                comparator,
                value,
            } => Concept::Data {
                property: property.clone(),
                comparator: *comparator,
                value: f(TermPosition::Datatype, value)?,
            },
            Concept::MinCard {
                count,
                role,
                filler,
            } => Concept::MinCard {
                count: f(TermPosition::Cardinality, count)?,
                role: role.clone(),
                filler: Box::new(filler.try_map_terms(f)?),
            },
            Concept::MaxCard {
                count,
                role,
                filler,
            } => Concept::MaxCard {
                count: f(TermPosition::Cardinality, count)?,
                role: role.clone(),
                filler: Box::new(filler.try_map_terms(f)?),
            },
            Concept::ExactCard {
                count,
                role,
                filler,
            } => Concept::ExactCard {
                count: f(TermPosition::Cardinality, count)?,
                role: role.clone(),
                filler: Box::new(filler.try_map_terms(f)?),
            },
        })
    }

    /// Calls `f` for every name occurring in the concept.
    pub fn for_each_name<'a>(&'a self, f: &mut impl FnMut(NameKind, &'a str)) {
        match self {
            Concept::Atomic(name) => f(NameKind::Concept, name),
            Concept::Not(inner) => inner.for_each_name(f),
            Concept::And(parts) => parts.iter().for_each(|p| p.for_each_name(f)),
            Concept::Exists { role, filler }
            | Concept::MinCard { role, filler, .. }
            | Concept::MaxCard { role, filler, .. }
            | Concept::ExactCard { role, filler, .. } => {
                f(NameKind::Role, role);
                filler.for_each_name(f);
            }
            Concept::Data { property, .. } => f(NameKind::DataProperty, property),
        }
    }

    pub fn is_ground(&self) -> bool {
        let mut ground = true;
        self.for_each_term(&mut |_, t| ground &= t.adaptor().is_none());
        ground
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Concept::Atomic(name) => write!(f, "{name}"),
            Concept::Not(inner) => write!(f, "¬{inner}"),
            Concept::And(parts) => {
                write!(f, "(")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ⊓ ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ")")
            }
            Concept::Exists { role, filler } => write!(f, "∃{role}.{filler}"),
            Concept::Data {
                property,
                comparator,
                value,
            } => write!(f, "∃{property}.({}, {value})", comparator.symbol()),
            Concept::MinCard {
                count,
                role,
                filler,
            } => write!(f, "≥{count} {role}.{filler}"),
            Concept::MaxCard {
                count,
                role,
                filler,
            } => write!(f, "≤{count} {role}.{filler}"),
            Concept::ExactCard {
                count,
                role,
                filler,
            } => write!(f, "={count} {role}.{filler}"),
        }
    }
}

/// Axioms: a definitorial TBox plus a finite ABox.
#[derive(Debug, Clone, PartialEq)]
pub enum Axiom {
    /// `name ≡ definition`
    Equiv {
        name: String,
        definition: Concept,
    },
    /// `sub ⊑ sup`; only atomic left-hand sides are accepted.
    SubClass {
        sub: Concept,
        sup: Concept,
    },
    ConceptAssertion {
        concept: Concept,
        individual: String,
    },
    RoleAssertion {
        role: String,
        subject: String,
        object: String,
    },
    DataAssertion {
        property: String,
        individual: String,
        value: f64,
    },
    FunctionalData(String),
}

impl Axiom {
    /// The concepts carried by the axiom, in order.
    pub fn concepts(&self) -> Vec<&Concept> {
        match self {
            Axiom::Equiv { definition, .. } => vec![definition],
            Axiom::SubClass { sub, sup } => vec![sub, sup],
            Axiom::ConceptAssertion { concept, .. } => vec![concept],
            _ => Vec::new(),
        }
    }

    /// Adaptor ids referenced by the axiom, deduplicated, in order of appearance.
    pub fn adaptor_refs(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for c in self.concepts() {
            c.for_each_term(&mut |_, t| {
                if let Some(id) = t.adaptor() {
                    if !out.contains(&id) {
                        out.push(id);
                    }
                }
            });
        }
        out
    }

    pub fn mentions_adaptor(&self, id: &str) -> bool {
        self.adaptor_refs().contains(&id)
    }

    pub fn is_ground(&self) -> bool {
        self.concepts().iter().all(|c| c.is_ground())
    }

    /// Individuals named by the axiom.
    pub fn individuals(&self) -> Vec<&str> {
        match self {
            Axiom::ConceptAssertion { individual, .. }
            | Axiom::DataAssertion { individual, .. } => {
                vec![individual]
            }
            Axiom::RoleAssertion {
                subject, object, ..
            } => vec![subject, object],
            _ => Vec::new(),
        }
    }

    /// Calls `f` for every non-individual name the axiom uses.
    pub fn for_each_name<'a>(&'a self, f: &mut impl FnMut(NameKind, &'a str)) {
        match self {
            Axiom::Equiv { name, definition } => {
                f(NameKind::Concept, name);
                definition.for_each_name(f);
            }
            Axiom::SubClass { sub, sup } => {
                sub.for_each_name(f);
                sup.for_each_name(f);
            }
            Axiom::ConceptAssertion { concept, .. } => concept.for_each_name(f),
            Axiom::RoleAssertion { role, .. } => f(NameKind::Role, role),
            Axiom::DataAssertion { property, .. } | Axiom::FunctionalData(property) => {
                f(NameKind::DataProperty, property)
            }
        }
    }

    fn try_map_terms(
        &self,
        f: &mut impl FnMut(TermPosition, &Term) -> Result<Term>,
    ) -> Result<Axiom> {
        Ok(match self {
            Axiom::Equiv { name, definition } => Axiom::Equiv {
                name: name.clone(),
                definition: definition.try_map_terms(f)?,
            },
            Axiom::SubClass { sub, sup } => Axiom::SubClass {
                sub: sub.try_map_terms(f)?,
                sup: sup.try_map_terms(f)?,
            },
            Axiom::ConceptAssertion {
                concept,
                individual,
            } => Axiom::ConceptAssertion {
                concept: concept.try_map_terms(f)?,
                individual: individual.clone(),
            },
            other => other.clone(),
        })
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Equiv { name, definition } => write!(f, "{name} ≡ {definition}"),
            Axiom::SubClass { sub, sup } => write!(f, "{sub} ⊑ {sup}"),
            Axiom::ConceptAssertion {
                concept,
                individual,
            } => write!(f, "{concept}({individual})"),
            Axiom::RoleAssertion {
                role,
                subject,
                object,
            } => write!(f, "{role}({subject}, {object})"),
            Axiom::DataAssertion {
                property,
                individual,
                value,
            } => write!(f, "{property}({individual}, {})", format_number(*value)),
            Axiom::FunctionalData(p) => write!(f, "Functional({p})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NameKind {
    Concept,
    Role,
    DataProperty,
    Individual,
}

impl NameKind {
    pub fn describe(self) -> &'static str {
        match self {
            NameKind::Concept => "concept",
            NameKind::Role => "role",
            NameKind::DataProperty => "data property",
            NameKind::Individual => "individual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Integer,
    Decimal,
}

/// The values an adaptor may take. `granularity` is the step to the
/// immediate predecessor and successor of a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueDomain {
    pub kind: DomainKind,
    pub granularity: f64,
}

impl ValueDomain {
    pub const INTEGER: ValueDomain = ValueDomain {
        kind: DomainKind::Integer,
        granularity: 1.0,
    };

    pub fn integer(granularity: u64) -> Result<ValueDomain> {
        if granularity == 0 {
            return Err(Error::InvalidOntology(
                "granularity must be positive".into(),
            ));
        }
        Ok(ValueDomain {
            kind: DomainKind::Integer,
            granularity: granularity as f64,
        })
    }

    pub fn decimal(granularity: f64) -> Result<ValueDomain> {
        if !(granularity.is_finite() && granularity > 0.0) {
            return Err(Error::InvalidOntology(format!(
                "granularity must be positive, got {granularity}"
            )));
        }
        Ok(ValueDomain {
            kind: DomainKind::Decimal,
            granularity,
        })
    }

    pub fn admits(&self, value: f64) -> bool {
        value.is_finite() && (self.kind == DomainKind::Decimal || value.fract() == 0.0)
    }

    /// Immediate predecessor and successor of `value`.
    pub fn neighbors(&self, value: f64) -> (f64, f64) {
        (value - self.granularity, value + self.granularity)
    }

    /// Rounds half away from zero onto the granularity grid.
    pub fn round(&self, value: f64) -> f64 {
        let steps = (value / self.granularity).round();
        let rounded = steps * self.granularity;
        match self.kind {
            DomainKind::Integer => rounded.round(),
            DomainKind::Decimal => rounded,
        }
    }
}

/// Immediate predecessor and successor of `value` within `domain`.
pub fn neighbors(value: f64, domain: &ValueDomain) -> (f64, f64) {
    domain.neighbors(value)
}

/// A named numeric metavariable and the value it currently holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Adaptor {
    pub id: String,
    pub current: f64,
    pub domain: ValueDomain,
}

impl Adaptor {
    pub fn integer(id: impl Into<String>, current: i64) -> Adaptor {
        Adaptor {
            id: id.into(),
            current: current as f64,
            domain: ValueDomain::INTEGER,
        }
    }
}

/// Binding of adaptor ids to values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment(BTreeMap<String, f64>);

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn bind(mut self, id: impl Into<String>, value: f64) -> Assignment {
        self.0.insert(id.into(), value);
        self
    }

    pub fn insert(&mut self, id: impl Into<String>, value: f64) -> Option<f64> {
        self.0.insert(id.into(), value)
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, f64)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

/// Declared vocabulary.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Signature {
    pub concepts: BTreeSet<String>,
    pub roles: BTreeSet<String>,
    pub data_properties: BTreeSet<String>,
    pub individuals: BTreeSet<String>,
}

impl Signature {
    pub fn kinds_of(&self, name: &str) -> Vec<NameKind> {
        let mut kinds = Vec::new();
        if self.concepts.contains(name) {
            kinds.push(NameKind::Concept);
        }
        if self.roles.contains(name) {
            kinds.push(NameKind::Role);
        }
        if self.data_properties.contains(name) {
            kinds.push(NameKind::DataProperty);
        }
        if self.individuals.contains(name) {
            kinds.push(NameKind::Individual);
        }
        kinds
    }

    pub fn contains(&self, kind: NameKind, name: &str) -> bool {
        self.set(kind).contains(name)
    }

    pub fn declare(&mut self, kind: NameKind, name: impl Into<String>) {
        self.set_mut(kind).insert(name.into());
    }

    fn set(&self, kind: NameKind) -> &BTreeSet<String> {
        match kind {
            NameKind::Concept => &self.concepts,
            NameKind::Role => &self.roles,
            NameKind::DataProperty => &self.data_properties,
            NameKind::Individual => &self.individuals,
        }
    }

    fn set_mut(&mut self, kind: NameKind) -> &mut BTreeSet<String> {
        match kind {
            NameKind::Concept => &mut self.concepts,
            NameKind::Role => &mut self.roles,
            NameKind::DataProperty => &mut self.data_properties,
            NameKind::Individual => &mut self.individuals,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Error,
    Warning,
}

/// A violated (or suspicious) ontology invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub severity: Severity,
    /// Offending axiom, when the issue is local to one.
    pub axiom: Option<usize>,
    /// Offending adaptor, when the issue concerns its declaration.
    pub adaptor: Option<String>,
    pub message: String,
}

impl Issue {
    fn error(axiom: Option<usize>, message: String) -> Issue {
        Issue {
            severity: Severity::Error,
            axiom,
            adaptor: None,
            message,
        }
    }
}

/// Signature, ordered axiom list and adaptor table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ontology {
    signature: Signature,
    axioms: Vec<Axiom>,
    adaptors: BTreeMap<String, Adaptor>,
}

impl Ontology {
    /// Builds an ontology, rejecting any that violates the model invariants.
    pub fn new(
        signature: Signature,
        axioms: Vec<Axiom>,
        adaptors: impl IntoIterator<Item = Adaptor>,
    ) -> Result<Ontology> {
        let ontology = Ontology::new_unchecked(signature, axioms, adaptors);
        let errors: Vec<String> = ontology
            .check()
            .into_iter()
            .filter(|i| i.severity == Severity::Error)
            .map(|i| match i.axiom {
                Some(ax) => format!("axiom {ax}: {}", i.message),
                None => i.message,
            })
            .collect();
        if errors.is_empty() {
            Ok(ontology)
        } else {
            Err(Error::InvalidOntology(errors.join("; ")))
        }
    }

    /// Builds an ontology without checking invariants; pair with [`Ontology::check`].
    pub fn new_unchecked(
        signature: Signature,
        axioms: Vec<Axiom>,
        adaptors: impl IntoIterator<Item = Adaptor>,
    ) -> Ontology {
        Ontology {
            signature,
            axioms,
            adaptors: adaptors.into_iter().map(|a| (a.id.clone(), a)).collect(),
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn axioms(&self) -> &[Axiom] {
        &self.axioms
    }

    pub fn adaptors(&self) -> impl Iterator<Item = &Adaptor> {
        self.adaptors.values()
    }

    pub fn adaptor(&self, id: &str) -> Option<&Adaptor> {
        self.adaptors.get(id)
    }

    pub(crate) fn set_adaptor_value(&mut self, id: &str, value: f64) {
        if let Some(a) = self.adaptors.get_mut(id) {
            a.current = value;
        }
    }

    /// The assignment given by the current adaptor values.
    pub fn current_assignment(&self) -> Assignment {
        self.adaptors
            .values()
            .map(|a| (a.id.clone(), a.current))
            .collect()
    }

    pub fn is_ground(&self) -> bool {
        self.axioms.iter().all(Axiom::is_ground)
    }

    /// Individuals declared or used in an assertion, sorted by name.
    pub fn individuals(&self) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = self
            .signature
            .individuals
            .iter()
            .map(String::as_str)
            .collect();
        for ax in &self.axioms {
            out.extend(ax.individuals());
        }
        out
    }

    /// Replaces every adaptor reference with the value `theta` binds to it.
    /// The adaptor table is carried over unchanged.
    pub fn instantiate(&self, theta: &Assignment) -> Result<Ontology> {
        let mut bind = |pos: TermPosition, term: &Term| -> Result<Term> {
            let Term::Adaptor(id) = term else {
                return Ok(term.clone());
            };
            let value = theta
                .get(id)
                .ok_or_else(|| Error::MissingBinding(id.clone()))?;
            if let Some(adaptor) = self.adaptors.get(id) {
                if !adaptor.domain.admits(value) {
                    return Err(Error::Domain {
                        adaptor: id.clone(),
                        value,
                        reason: "not in the adaptor's value domain".into(),
                    });
                }
            }
            if pos == TermPosition::Cardinality && !is_cardinal(value) {
                return Err(Error::Domain {
                    adaptor: id.clone(),
                    value,
                    reason: "cardinalities must be non-negative integers".into(),
                });
            }
            Ok(Term::Literal(value))
        };
        let axioms = self
            .axioms
            .iter()
            .map(|ax| ax.try_map_terms(&mut bind))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ontology {
            signature: self.signature.clone(),
            axioms,
            adaptors: self.adaptors.clone(),
        })
    }

    /// Grounds the ontology with its own adaptor values.
    pub fn ground(&self) -> Result<Ontology> {
        self.instantiate(&self.current_assignment())
    }

    /// Indices of the axioms that reference `adaptor`, in list order.
    pub fn dependent_axioms(&self, adaptor: &str) -> Result<Vec<usize>> {
        if !self.adaptors.contains_key(adaptor) {
            return Err(Error::UnknownAdaptor(adaptor.to_string()));
        }
        Ok(self
            .axioms
            .iter()
            .enumerate()
            .filter(|(_, ax)| ax.mentions_adaptor(adaptor))
            .map(|(i, _)| i)
            .collect())
    }

    /// Positions (datatype / cardinality) in which each adaptor is used.
    pub fn adaptor_uses(&self) -> HashMap<&str, Vec<TermPosition>> {
        let mut uses: HashMap<&str, Vec<TermPosition>> = HashMap::new();
        for ax in &self.axioms {
            for c in ax.concepts() {
                c.for_each_term(&mut |pos, t| {
                    if let Some(id) = t.adaptor() {
                        let entry = uses.entry(id).or_default();
                        if !entry.contains(&pos) {
                            entry.push(pos);
                        }
                    }
                });
            }
        }
        uses
    }

    pub fn is_cardinality_adaptor(&self, id: &str) -> bool {
        self.adaptor_uses()
            .get(id)
            .is_some_and(|u| u.contains(&TermPosition::Cardinality))
    }

    /// The ontology restricted to the given axioms (in their original order).
    /// Signature and adaptor table are kept.
    pub fn subset(&self, indices: impl IntoIterator<Item = usize>) -> Ontology {
        let keep: BTreeSet<usize> = indices.into_iter().collect();
        Ontology {
            signature: self.signature.clone(),
            axioms: keep
                .into_iter()
                .filter_map(|i| self.axioms.get(i).cloned())
                .collect(),
            adaptors: self.adaptors.clone(),
        }
    }

    /// A copy with `extra` appended to the axiom list and `individuals` declared.
    pub fn extended(&self, extra: &[Axiom]) -> Ontology {
        let mut out = self.clone();
        for ax in extra {
            for ind in ax.individuals() {
                out.signature.individuals.insert(ind.to_string());
            }
        }
        out.axioms.extend_from_slice(extra);
        out
    }

    /// Checks every model invariant, reporting all violations.
    pub fn check(&self) -> Vec<Issue> {
        let mut issues = Vec::new();
        let sig = &self.signature;

        let all: Vec<(&String, NameKind)> = sig
            .concepts
            .iter()
            .map(|n| (n, NameKind::Concept))
            .chain(sig.roles.iter().map(|n| (n, NameKind::Role)))
            .chain(
                sig.data_properties
                    .iter()
                    .map(|n| (n, NameKind::DataProperty)),
            )
            .chain(sig.individuals.iter().map(|n| (n, NameKind::Individual)))
            .collect();
        let mut seen: HashMap<&str, NameKind> = HashMap::new();
        for (name, kind) in all {
            if let Some(prev) = seen.insert(name, kind) {
                issues.push(Issue::error(
                    None,
                    format!(
                        "`{name}` is declared both as {} and as {}",
                        prev.describe(),
                        kind.describe()
                    ),
                ));
            }
        }

        for adaptor in self.adaptors.values() {
            if !adaptor.domain.admits(adaptor.current) {
                issues.push(Issue {
                    severity: Severity::Error,
                    axiom: None,
                    adaptor: Some(adaptor.id.clone()),
                    message: format!(
                        "adaptor domain mismatch: `{}` is an integer adaptor but holds {}",
                        adaptor.id,
                        format_number(adaptor.current)
                    ),
                });
            }
        }

        let mut equiv_for: HashMap<&str, usize> = HashMap::new();
        for (i, ax) in self.axioms.iter().enumerate() {
            let mut check_name = |kind: NameKind, name: &str| {
                if sig.contains(kind, name) {
                    return;
                }
                let kinds = sig.kinds_of(name);
                let message = match kinds.first() {
                    None => format!("unknown name {name}"),
                    Some(actual) => format!(
                        "`{name}` is a {}, expected a {}",
                        actual.describe(),
                        kind.describe()
                    ),
                };
                issues.push(Issue::error(Some(i), message));
            };
            ax.for_each_name(&mut check_name);
            for ind in ax.individuals() {
                check_name(NameKind::Individual, ind);
            }

            for c in ax.concepts() {
                check_concept_shape(c, i, &mut issues);
                c.for_each_term(&mut |pos, t| match t {
                    Term::Adaptor(id) => {
                        if !self.adaptors.contains_key(id) {
                            issues.push(Issue::error(Some(i), format!("unknown adaptor {id}")));
                        }
                    }
                    Term::Literal(v) => {
                        if pos == TermPosition::Cardinality && !is_cardinal(*v) {
                            issues.push(Issue::error(
                                Some(i),
                                format!(
                                    "cardinality {} is not a non-negative integer",
                                    format_number(*v)
                                ),
                            ));
                        }
                    }
                });
            }

            match ax {
                Axiom::Equiv { name, .. } => {
                    if let Some(prev) = equiv_for.insert(name, i) {
                        issues.push(Issue::error(
                            Some(i),
                            format!("`{name}` already has a definition (axiom {prev})"),
                        ));
                    }
                }
                Axiom::SubClass { sub, .. } if !matches!(sub, Concept::Atomic(_)) => {
                    issues.push(Issue::error(
                        Some(i),
                        "only atomic concepts are supported on the left of an inclusion".into(),
                    ));
                }
                _ => {}
            }
        }

        if let Some((axiom, name)) = self.find_definition_cycle() {
            issues.push(Issue::error(
                Some(axiom),
                format!("cyclic definition involving {name}"),
            ));
        }

        let mut uses: Vec<(&str, Vec<TermPosition>)> = self.adaptor_uses().into_iter().collect();
        uses.sort_by(|a, b| a.0.cmp(b.0));
        for (id, positions) in uses {
            let Some(adaptor) = self.adaptors.get(id) else {
                continue;
            };
            if positions.contains(&TermPosition::Cardinality) {
                if adaptor.domain.kind != DomainKind::Integer || !is_cardinal(adaptor.current) {
                    issues.push(Issue {
                        severity: Severity::Error,
                        axiom: None,
                        adaptor: Some(id.to_string()),
                        message: format!(
                            "adaptor domain mismatch: `{id}` restricts a cardinality and must be a non-negative integer"
                        ),
                    });
                }
                if positions.contains(&TermPosition::Datatype) {
                    issues.push(Issue {
                        severity: Severity::Warning,
                        axiom: None,
                        adaptor: Some(id.to_string()),
                        message: format!(
                            "adaptor `{id}` restricts both a datatype value and a cardinality"
                        ),
                    });
                }
            }
        }

        issues
    }

    /// Returns an axiom on a cycle of the definition graph, if any. Edges run
    /// from a defined (or atomically included) name to the names its
    /// right-hand side mentions.
    fn find_definition_cycle(&self) -> Option<(usize, String)> {
        let mut edges: BTreeMap<&str, Vec<(&str, usize)>> = BTreeMap::new();
        for (i, ax) in self.axioms.iter().enumerate() {
            let (lhs, rhs) = match ax {
                Axiom::Equiv { name, definition } => (name.as_str(), definition),
                Axiom::SubClass {
                    sub: Concept::Atomic(name),
                    sup,
                } => (name.as_str(), sup),
                _ => continue,
            };
            let targets = edges.entry(lhs).or_default();
            rhs.for_each_name(&mut |kind, n| {
                if kind == NameKind::Concept {
                    targets.push((n, i));
                }
            });
        }

        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        fn visit<'a>(
            node: &'a str,
            edges: &BTreeMap<&'a str, Vec<(&'a str, usize)>>,
            marks: &mut HashMap<&'a str, Mark>,
        ) -> Option<(usize, String)> {
            marks.insert(node, Mark::Active);
            for &(next, axiom) in edges.get(node).map(Vec::as_slice).unwrap_or(&[]) {
                match marks.get(next) {
                    Some(Mark::Active) => return Some((axiom, next.to_string())),
                    Some(Mark::Done) => {}
                    None => {
                        if let Some(found) = visit(next, edges, marks) {
                            return Some(found);
                        }
                    }
                }
            }
            marks.insert(node, Mark::Done);
            None
        }

        let mut marks = HashMap::new();
        for &start in edges.keys() {
            if !marks.contains_key(start) {
                if let Some(found) = visit(start, &edges, &mut marks) {
                    return Some(found);
                }
            }
        }
        None
    }
}

fn check_concept_shape(c: &Concept, axiom: usize, issues: &mut Vec<Issue>) {
    match c {
        Concept::Atomic(_) | Concept::Data { .. } => {}
        Concept::Not(inner) => check_concept_shape(inner, axiom, issues),
        Concept::And(parts) => {
            if parts.len() < 2 {
                issues.push(Issue::error(
                    Some(axiom),
                    "a conjunction needs at least two operands".into(),
                ));
            }
            parts
                .iter()
                .for_each(|p| check_concept_shape(p, axiom, issues));
        }
        Concept::Exists { filler, .. }
        | Concept::MinCard { filler, .. }
        | Concept::MaxCard { filler, .. }
        | Concept::ExactCard { filler, .. } => check_concept_shape(filler, axiom, issues),
    }
}

/// Non-negative integer test used for cardinalities.
pub fn is_cardinal(value: f64) -> bool {
    value.is_finite() && value >= 0.0 && value.fract() == 0.0
}

/// Shortest decimal text that reads back as the same `f64`.
pub fn format_number(value: f64) -> String {
    if value == 0.0 {
        // normalises -0
        return "0".into();
    }
    format!("{value}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn persons() -> Ontology {
        let mut sig = Signature::default();
        for c in ["Person", "Minor", "LegalAdult", "BusyParent"] {
            sig.declare(NameKind::Concept, c);
        }
        sig.declare(NameKind::DataProperty, "hasAge");
        sig.declare(NameKind::Role, "parentOf");
        let x1 = || Term::Adaptor("X1".into());
        let axioms = vec![
            Axiom::Equiv {
                name: "Minor".into(),
                definition: Concept::And(vec![
                    Concept::atomic("Person"),
                    Concept::data("hasAge", Comparator::Lt, x1()),
                ]),
            },
            Axiom::Equiv {
                name: "LegalAdult".into(),
                definition: Concept::And(vec![
                    Concept::atomic("Person"),
                    Concept::data("hasAge", Comparator::Ge, x1()),
                ]),
            },
            Axiom::Equiv {
                name: "BusyParent".into(),
                definition: Concept::And(vec![
                    Concept::atomic("Person"),
                    Concept::min_card(
                        Term::Adaptor("X2".into()),
                        "parentOf",
                        Concept::atomic("Minor"),
                    ),
                ]),
            },
            Axiom::FunctionalData("hasAge".into()),
        ];
        Ontology::new(
            sig,
            axioms,
            [Adaptor::integer("X1", 18), Adaptor::integer("X2", 3)],
        )
        .unwrap()
    }

    #[test]
    fn instantiates_expensive_template() {
        let mut sig = Signature::default();
        sig.declare(NameKind::Concept, "Expensive");
        sig.declare(NameKind::DataProperty, "hasMeasure");
        let o = Ontology::new(
            sig,
            vec![Axiom::SubClass {
                sub: Concept::atomic("Expensive"),
                sup: Concept::data("hasMeasure", Comparator::Ge, Term::Adaptor("X".into())),
            }],
            [Adaptor::integer("X", 100)],
        )
        .unwrap();
        let g = o.instantiate(&Assignment::new().bind("X", 200.0)).unwrap();
        assert_eq!(
            g.axioms()[0],
            Axiom::SubClass {
                sub: Concept::atomic("Expensive"),
                sup: Concept::data("hasMeasure", Comparator::Ge, Term::Literal(200.0)),
            }
        );
        assert!(g.is_ground());
        assert_eq!(
            g.axioms()[0].to_string(),
            "Expensive ⊑ ∃hasMeasure.(≥, 200)"
        );
    }

    #[test]
    fn instantiate_without_refs_is_identity() {
        let mut sig = Signature::default();
        sig.declare(NameKind::Concept, "A");
        sig.declare(NameKind::Individual, "a");
        let o = Ontology::new(
            sig,
            vec![Axiom::ConceptAssertion {
                concept: Concept::atomic("A"),
                individual: "a".into(),
            }],
            [],
        )
        .unwrap();
        assert_eq!(o.instantiate(&Assignment::new().bind("Z", 3.0)).unwrap(), o);
    }

    #[test]
    fn instantiate_reports_missing_binding() {
        let err = persons()
            .instantiate(&Assignment::new().bind("X1", 18.0))
            .unwrap_err();
        assert!(matches!(err, Error::MissingBinding(id) if id == "X2"));
    }

    #[test]
    fn instantiate_rejects_fractional_cardinality() {
        let err = persons()
            .instantiate(&Assignment::new().bind("X1", 18.0).bind("X2", 2.5))
            .unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
    }

    #[test]
    fn dependent_axioms_follow_list_order() {
        let o = persons();
        assert_eq!(o.dependent_axioms("X1").unwrap(), vec![0, 1]);
        assert_eq!(o.dependent_axioms("X2").unwrap(), vec![2]);
        assert!(matches!(
            o.dependent_axioms("nope"),
            Err(Error::UnknownAdaptor(_))
        ));
    }

    #[test]
    fn dependent_axioms_counts_double_reference_once() {
        let mut sig = Signature::default();
        sig.declare(NameKind::Concept, "Mid");
        sig.declare(NameKind::DataProperty, "v");
        let x = || Term::Adaptor("X".into());
        let o = Ontology::new(
            sig,
            vec![Axiom::Equiv {
                name: "Mid".into(),
                definition: Concept::And(vec![
                    Concept::data("v", Comparator::Ge, x()),
                    Concept::data("v", Comparator::Le, x()),
                ]),
            }],
            [Adaptor::integer("X", 5), Adaptor::integer("Unused", 1)],
        )
        .unwrap();
        assert_eq!(o.dependent_axioms("X").unwrap(), vec![0]);
        assert!(o.dependent_axioms("Unused").unwrap().is_empty());
    }

    #[test]
    fn neighbor_steps() {
        assert_eq!(neighbors(16.0, &ValueDomain::INTEGER), (15.0, 17.0));
        assert_eq!(neighbors(1325.0, &ValueDomain::INTEGER), (1324.0, 1326.0));
        let half = ValueDomain::decimal(0.5).unwrap();
        assert_eq!(neighbors(2.5, &half), (2.0, 3.0));
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        let d = ValueDomain::INTEGER;
        assert_eq!(d.round(2.5), 3.0);
        assert_eq!(d.round(-2.5), -3.0);
        assert_eq!(d.round(2.49), 2.0);
        let half = ValueDomain::decimal(0.5).unwrap();
        assert_eq!(half.round(1.3), 1.5);
    }

    #[test]
    fn detects_definition_cycles() {
        let mut sig = Signature::default();
        for c in ["A", "B", "C"] {
            sig.declare(NameKind::Concept, c);
        }
        let err = Ontology::new(
            sig,
            vec![
                Axiom::Equiv {
                    name: "A".into(),
                    definition: Concept::And(vec![Concept::atomic("B"), Concept::atomic("C")]),
                },
                Axiom::SubClass {
                    sub: Concept::atomic("B"),
                    sup: Concept::not(Concept::atomic("A")),
                },
            ],
            [],
        )
        .unwrap_err();
        assert!(err.to_string().contains("cyclic definition"), "{err}");
    }

    #[test]
    fn rejects_second_definition_and_complex_inclusion() {
        let mut sig = Signature::default();
        for c in ["A", "B", "C"] {
            sig.declare(NameKind::Concept, c);
        }
        let issues = Ontology::new_unchecked(
            sig,
            vec![
                Axiom::Equiv {
                    name: "A".into(),
                    definition: Concept::atomic("B"),
                },
                Axiom::Equiv {
                    name: "A".into(),
                    definition: Concept::atomic("C"),
                },
                Axiom::SubClass {
                    sub: Concept::not(Concept::atomic("B")),
                    sup: Concept::atomic("C"),
                },
            ],
            [],
        )
        .check();
        assert_eq!(issues.len(), 2, "{issues:?}");
        assert_eq!(issues[0].axiom, Some(1));
        assert_eq!(issues[1].axiom, Some(2));
    }

    #[test]
    fn cardinality_adaptor_must_be_cardinal() {
        let mut o = persons();
        o.adaptors.get_mut("X2").unwrap().current = -1.0;
        let issues = o.check();
        assert!(issues
            .iter()
            .any(|i| i.severity == Severity::Error && i.message.contains("domain mismatch")));
    }

    #[test]
    fn mixed_adaptor_use_is_a_warning() {
        let mut sig = Signature::default();
        sig.declare(NameKind::Concept, "A");
        sig.declare(NameKind::Concept, "B");
        sig.declare(NameKind::Role, "r");
        sig.declare(NameKind::DataProperty, "v");
        let o = Ontology::new(
            sig,
            vec![Axiom::Equiv {
                name: "A".into(),
                definition: Concept::And(vec![
                    Concept::data("v", Comparator::Ge, Term::Adaptor("N".into())),
                    Concept::max_card(Term::Adaptor("N".into()), "r", Concept::atomic("B")),
                ]),
            }],
            [Adaptor::integer("N", 2)],
        )
        .expect("mixed use is allowed");
        let issues = o.check();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].severity, Severity::Warning);
        assert_eq!(issues[0].adaptor.as_deref(), Some("N"));
    }

    #[test]
    fn grounding_is_idempotent() {
        let o = persons();
        let once = o.ground().unwrap();
        let twice = once
            .instantiate(&Assignment::new().bind("X1", 99.0))
            .unwrap();
        assert_eq!(once, twice);
    }
}
