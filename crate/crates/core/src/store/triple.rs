use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use super::term::{Term, Variable};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("invalid triple {triple}: {reason}")]
    InvalidTriple { triple: String, reason: String },
}

/// A stored fact. Fields are plain terms; `validate` enforces the shape the
/// store accepts (IRI subject and predicate, no variables anywhere).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Term>, predicate: impl Into<Term>, object: impl Into<Term>) -> Self {
        Triple { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        let fail = |reason: &str| {
            Err(StoreError::InvalidTriple { triple: self.to_string(), reason: reason.to_string() })
        };
        for (position, term) in [("subject", &self.subject), ("predicate", &self.predicate)] {
            match term {
                Term::Iri(iri) if iri.is_valid() => {}
                Term::Iri(_) => return fail(&format!("{position} IRI is empty or contains whitespace")),
                _ => return fail(&format!("{position} must be an IRI")),
            }
        }
        match &self.object {
            Term::Iri(iri) if !iri.is_valid() => fail("object IRI is empty or contains whitespace"),
            Term::Literal(lit) if !lit.is_valid() => fail("literal does not parse under its datatype"),
            Term::Variable(_) => fail("variables cannot be stored"),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

/// Variable assignments produced by unification.
pub type Bindings = BTreeMap<Variable, Term>;

/// Three terms, any of which may be a variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: impl Into<Term>, predicate: impl Into<Term>, object: impl Into<Term>) -> Self {
        TriplePattern { subject: subject.into(), predicate: predicate.into(), object: object.into() }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.terms().into_iter().filter_map(Term::as_variable)
    }

    /// Replaces bound variables by their values.
    pub fn substitute(&self, bindings: &Bindings) -> TriplePattern {
        let sub = |t: &Term| match t {
            Term::Variable(v) => bindings.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        };
        TriplePattern { subject: sub(&self.subject), predicate: sub(&self.predicate), object: sub(&self.object) }
    }

    /// Unifies with a ground triple. A variable repeated inside the pattern
    /// must bind to the same term at each occurrence.
    pub fn unify(&self, triple: &Triple) -> Option<Bindings> {
        let mut bindings = Bindings::new();
        for (pat, value) in self.terms().into_iter().zip([&triple.subject, &triple.predicate, &triple.object]) {
            match pat {
                Term::Variable(v) => match bindings.get(v) {
                    Some(bound) if bound != value => return None,
                    Some(_) => {}
                    None => {
                        bindings.insert(v.clone(), value.clone());
                    }
                },
                ground if ground != value => return None,
                _ => {}
            }
        }
        Some(bindings)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

impl fmt::Debug for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

type Index = HashMap<Term, BTreeSet<Triple>>;

/// Set of facts with subject, predicate and object indexes.
///
/// Mutation goes through `&mut self`, so a single owner serializes writers;
/// readers can share a clone or a `&TripleStore` across threads.
#[derive(Clone, Default)]
pub struct TripleStore {
    facts: BTreeSet<Triple>,
    by_subject: Index,
    by_predicate: Index,
    by_object: Index,
}

fn index_add(index: &mut Index, key: &Term, triple: &Triple) {
    index.entry(key.clone()).or_default().insert(triple.clone());
}

fn index_remove(index: &mut Index, key: &Term, triple: &Triple) {
    if let Some(set) = index.get_mut(key) {
        set.remove(triple);
        if set.is_empty() {
            index.remove(key);
        }
    }
}

impl TripleStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns `true` iff the triple was absent.
    pub fn insert(&mut self, triple: Triple) -> Result<bool, StoreError> {
        triple.validate()?;
        if self.facts.contains(&triple) {
            return Ok(false);
        }
        index_add(&mut self.by_subject, &triple.subject, &triple);
        index_add(&mut self.by_predicate, &triple.predicate, &triple);
        index_add(&mut self.by_object, &triple.object, &triple);
        self.facts.insert(triple);
        Ok(true)
    }

    /// Inserts every triple or none of them; returns the number newly added.
    pub fn insert_all(&mut self, triples: impl IntoIterator<Item = Triple>) -> Result<usize, StoreError> {
        let batch: Vec<Triple> = triples.into_iter().collect();
        for t in &batch {
            t.validate()?;
        }
        let mut added = 0;
        for t in batch {
            if self.insert(t)? {
                added += 1;
            }
        }
        Ok(added)
    }

    /// Returns `true` iff the triple was present.
    pub fn remove(&mut self, triple: &Triple) -> bool {
        if !self.facts.remove(triple) {
            return false;
        }
        index_remove(&mut self.by_subject, &triple.subject, triple);
        index_remove(&mut self.by_predicate, &triple.predicate, triple);
        index_remove(&mut self.by_object, &triple.object, triple);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.facts.contains(triple)
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    /// Facts in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.facts.iter()
    }

    /// Stored triples unifying with `pattern`, in canonical order.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple> {
        let lookups = [
            (&pattern.subject, &self.by_subject),
            (&pattern.predicate, &self.by_predicate),
            (&pattern.object, &self.by_object),
        ];
        let mut candidates: Option<&BTreeSet<Triple>> = None;
        for (term, index) in lookups {
            if term.is_variable() {
                continue;
            }
            match index.get(term) {
                None => return Vec::new(),
                Some(set) if candidates.is_none_or(|c| set.len() < c.len()) => candidates = Some(set),
                Some(_) => {}
            }
        }
        let source = candidates.unwrap_or(&self.facts);
        source.iter().filter(|t| pattern.unify(t).is_some()).cloned().collect()
    }

    /// Index coherence: every index entry is a stored fact and every stored
    /// fact is present under its subject, predicate and object.
    pub fn indexes_coherent(&self) -> bool {
        let indexed = |index: &Index, key: fn(&Triple) -> &Term| {
            let total: usize = index.values().map(BTreeSet::len).sum();
            total == self.facts.len()
                && index.iter().all(|(k, set)| set.iter().all(|t| key(t) == k && self.facts.contains(t)))
        };
        indexed(&self.by_subject, |t| &t.subject)
            && indexed(&self.by_predicate, |t| &t.predicate)
            && indexed(&self.by_object, |t| &t.object)
    }
}

impl fmt::Debug for TripleStore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.facts.iter()).finish()
    }
}

impl PartialEq for TripleStore {
    fn eq(&self, other: &Self) -> bool {
        self.facts == other.facts
    }
}

impl Eq for TripleStore {}
