//! Random ontologies over a small fixed vocabulary.
#![allow(dead_code)]

use proptest::prelude::*;
use vago_core::model::NameKind;
use vago_core::{Adaptor, Axiom, Comparator, Concept, Ontology, Signature, Term};

pub const PRIMITIVES: [&str; 3] = ["A0", "A1", "A2"];
pub const DEFINED: [&str; 2] = ["D0", "D1"];
pub const ROLES: [&str; 2] = ["r", "s"];
pub const PROPS: [&str; 2] = ["p", "q"];
pub const INDIVIDUALS: [&str; 4] = ["i0", "i1", "i2", "i3"];

pub fn signature() -> Signature {
    let mut s = Signature::default();
    for c in PRIMITIVES.iter().chain(&DEFINED) {
        s.declare(NameKind::Concept, *c);
    }
    for r in ROLES {
        s.declare(NameKind::Role, r);
    }
    for p in PROPS {
        s.declare(NameKind::DataProperty, p);
    }
    for i in INDIVIDUALS {
        s.declare(NameKind::Individual, i);
    }
    s
}

fn comparator() -> impl Strategy<Value = Comparator> {
    prop::sample::select(Comparator::ALL.to_vec())
}

/// `X` is only used as a data threshold, `K` only as a count.
fn threshold() -> impl Strategy<Value = Term> {
    prop_oneof![
        2 => Just(Term::Adaptor("X".into())),
        1 => (0..30i32).prop_map(|v| Term::Literal(v as f64)),
    ]
}

fn count() -> impl Strategy<Value = Term> {
    prop_oneof![
        1 => Just(Term::Adaptor("K".into())),
        1 => (0..4i32).prop_map(|v| Term::Literal(v as f64)),
    ]
}

/// Concept expressions over the given atomic names.
pub fn concept(atoms: &'static [&'static str]) -> impl Strategy<Value = Concept> {
    let leaf = prop_oneof![
        prop::sample::select(atoms.to_vec()).prop_map(Concept::atomic),
        (
            prop::sample::select(PROPS.to_vec()),
            comparator(),
            threshold()
        )
            .prop_map(|(p, c, t)| Concept::data(p, c, t)),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        let role = prop::sample::select(ROLES.to_vec());
        prop_oneof![
            inner.clone().prop_map(Concept::not),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Concept::And),
            (role.clone(), inner.clone()).prop_map(|(r, f)| Concept::exists(r, f)),
            (0..3usize, count(), role, inner).prop_map(|(k, n, r, f)| match k {
                0 => Concept::min_card(n, r, f),
                1 => Concept::max_card(n, r, f),
                _ => Concept::exact_card(n, r, f),
            }),
        ]
    })
}

static ALL_CONCEPTS: [&str; 5] = ["A0", "A1", "A2", "D0", "D1"];
static LOWER: [&str; 2] = ["A0", "A1"];

pub fn tbox() -> impl Strategy<Value = Vec<Axiom>> {
    (
        concept(&PRIMITIVES),
        concept(&LOWER),
        prop::option::of(concept(&LOWER)),
        any::<bool>(),
    )
        .prop_map(|(d0, d1, sup, functional)| {
            // D1 may mention D0 through A-names only, so definitions are acyclic.
            let mut out = vec![
                Axiom::Equiv {
                    name: "D0".into(),
                    definition: d0,
                },
                Axiom::Equiv {
                    name: "D1".into(),
                    definition: d1,
                },
            ];
            if let Some(sup) = sup {
                out.push(Axiom::SubClass {
                    sub: Concept::atomic("A2"),
                    sup,
                });
            }
            if functional {
                out.push(Axiom::FunctionalData("p".into()));
            }
            out
        })
}

pub fn assertion() -> impl Strategy<Value = Axiom> {
    let ind = || prop::sample::select(INDIVIDUALS.to_vec()).prop_map(String::from);
    prop_oneof![
        3 => (concept(&ALL_CONCEPTS), ind()).prop_map(|(concept, individual)| {
            Axiom::ConceptAssertion { concept, individual }
        }),
        2 => (prop::sample::select(ROLES.to_vec()), ind(), ind()).prop_map(|(r, a, b)| {
            Axiom::RoleAssertion { role: r.into(), subject: a, object: b }
        }),
        2 => (prop::sample::select(PROPS.to_vec()), ind(), 0..30i32).prop_map(|(p, i, v)| {
            Axiom::DataAssertion { property: p.into(), individual: i, value: v as f64 }
        }),
    ]
}

pub fn adaptors() -> impl Strategy<Value = (i64, i64)> {
    (0..30i64, 0..4i64)
}

pub fn build(tbox: Vec<Axiom>, abox: Vec<Axiom>, (x, k): (i64, i64)) -> Ontology {
    let mut axioms = tbox;
    axioms.extend(abox);
    Ontology::new(
        signature(),
        axioms,
        [Adaptor::integer("X", x), Adaptor::integer("K", k)],
    )
    .expect("generated ontologies are well-formed")
}

pub fn ontology() -> impl Strategy<Value = Ontology> {
    (tbox(), prop::collection::vec(assertion(), 0..8), adaptors())
        .prop_map(|(t, a, xk)| build(t, a, xk))
}
