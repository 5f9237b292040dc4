use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{OntologySchema, Range};
use crate::store::{Iri, Term, Triple, TripleStore};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Subject has no asserted type under the property's domain.
    Domain { expected: Iri },
    /// Object is not an instance of the range class or not of the range datatype.
    Range { expected: Range },
    /// `rdf:type` names a class outside the schema.
    UnknownClass,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub triple: Triple,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ViolationKind::Domain { expected } => write!(f, "domain violation: {} (expected subject in {expected})", self.triple),
            ViolationKind::Range { expected: Range::Class(c) } => {
                write!(f, "range violation: {} (expected object in {c})", self.triple)
            }
            ViolationKind::Range { expected: Range::Datatype(dt) } => {
                write!(f, "range violation: {} (expected {dt} literal)", self.triple)
            }
            ViolationKind::UnknownClass => write!(f, "unknown class: {}", self.triple),
        }
    }
}

/// Checks every fact against the schema's domain/range constraints (under
/// subclass closure of asserted types) and every `rdf:type` against the
/// class set. An empty result means the store is valid.
pub fn validate(store: &TripleStore, schema: &OntologySchema) -> Vec<Violation> {
    let rdf_type = Term::Iri(Iri::rdf_type());
    let mut types: BTreeMap<&Term, BTreeSet<&Iri>> = BTreeMap::new();
    for t in store.iter().filter(|t| t.predicate == rdf_type) {
        if let Term::Iri(class) = &t.object {
            types.entry(&t.subject).or_default().insert(class);
        }
    }
    let instance_of = |term: &Term, class: &Iri| {
        types
            .get(term)
            .into_iter()
            .flatten()
            .any(|t| schema.has_class(t) && schema.is_subclass_of(t, class).unwrap_or(false))
    };

    let mut out = Vec::new();
    for t in store.iter() {
        if t.predicate == rdf_type {
            let known = matches!(&t.object, Term::Iri(c) if schema.has_class(c));
            if !known {
                out.push(Violation { triple: t.clone(), kind: ViolationKind::UnknownClass });
            }
            continue;
        }
        let Some(constraint) = t.predicate.as_iri().and_then(|p| schema.properties().get(p)) else {
            continue;
        };
        if let Some(domain) = &constraint.domain {
            if !instance_of(&t.subject, domain) {
                out.push(Violation { triple: t.clone(), kind: ViolationKind::Domain { expected: domain.clone() } });
            }
        }
        if let Some(range) = &constraint.range {
            let ok = match (range, &t.object) {
                (Range::Class(c), obj @ Term::Iri(_)) => instance_of(obj, c),
                (Range::Datatype(dt), Term::Literal(lit)) => lit.datatype() == *dt,
                _ => false,
            };
            if !ok {
                out.push(Violation { triple: t.clone(), kind: ViolationKind::Range { expected: range.clone() } });
            }
        }
    }
    out
}
