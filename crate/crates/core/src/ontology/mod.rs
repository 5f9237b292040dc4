//! Crisis domain ontology: class hierarchy, subclass reasoning, crisis-type
//! matching and context merging on top of the triple store.

mod matching;
mod schema;
mod validate;

pub use matching::{match_crisis_type, profiles_from_store, CrisisTypeProfile, JaccardScore, MatchResult};
pub use schema::{build_domain_ontology, OntologySchema, PropertyConstraint, Range};
pub use validate::{validate, Violation, ViolationKind};

use std::collections::BTreeSet;

use crate::store::{Iri, StoreError, Term, Triple, TriplePattern, TripleStore};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OntologyError {
    #[error("unknown class {0}")]
    UnknownClass(Iri),
    #[error("subclass edges form a cycle through {0}")]
    Cycle(Iri),
    #[error("invalid schema manifest: {0}")]
    Manifest(String),
    #[error("crisis-type profile for {0} has no characteristic features")]
    EmptyProfile(Iri),
    #[error("{0} is not a subclass of cm:Crisis")]
    NotACrisisType(Iri),
    #[error("no observed features to match against")]
    EmptyObservation,
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Every subject typed (directly) with `class` or one of its subclasses.
pub fn instances_of(store: &TripleStore, schema: &OntologySchema, class: &Iri) -> Result<BTreeSet<Iri>, OntologyError> {
    if !schema.has_class(class) {
        return Err(OntologyError::UnknownClass(class.clone()));
    }
    let pattern = TriplePattern::new(Term::var("s"), Iri::rdf_type(), Term::var("d"));
    let mut out = BTreeSet::new();
    for t in store.match_pattern(&pattern) {
        let (Term::Iri(subject), Term::Iri(declared)) = (&t.subject, &t.object) else {
            continue;
        };
        if schema.has_class(declared) && schema.is_subclass_of(declared, class)? {
            out.insert(subject.clone());
        }
    }
    Ok(out)
}

/// Inserts the union of both fact sets. The resulting store does not depend
/// on argument order, and merging a set twice adds it once.
pub fn merge_context(
    store: &mut TripleStore,
    crisis_facts: &BTreeSet<Triple>,
    context_facts: &BTreeSet<Triple>,
) -> Result<usize, OntologyError> {
    let union: BTreeSet<&Triple> = crisis_facts.union(context_facts).collect();
    Ok(store.insert_all(union.into_iter().cloned())?)
}

/// Adds `(s, rdf:type, super)` for every asserted type's superclasses.
/// Returns the number of inferred triples added.
pub fn materialize_types(store: &mut TripleStore, schema: &OntologySchema) -> usize {
    let pattern = TriplePattern::new(Term::var("s"), Iri::rdf_type(), Term::var("d"));
    let mut inferred = Vec::new();
    for t in store.match_pattern(&pattern) {
        let Term::Iri(declared) = &t.object else { continue };
        for sup in schema.superclasses(declared) {
            inferred.push(Triple::new(t.subject.clone(), Iri::rdf_type(), sup.clone()));
        }
    }
    store.insert_all(inferred).expect("inferred triples reuse valid terms")
}
