use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::{OntologyError, OntologySchema};
use crate::store::{Iri, Term, TriplePattern, TripleStore};

/// A crisis subclass together with the feature markers that characterize it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrisisTypeProfile {
    type_class: Iri,
    features: BTreeSet<Iri>,
}

impl CrisisTypeProfile {
    pub fn new(schema: &OntologySchema, type_class: Iri, features: BTreeSet<Iri>) -> Result<Self, OntologyError> {
        let crisis = Iri::cm("Crisis");
        if !schema.has_class(&type_class) || !schema.is_subclass_of(&type_class, &crisis)? {
            return Err(OntologyError::NotACrisisType(type_class));
        }
        if features.is_empty() {
            return Err(OntologyError::EmptyProfile(type_class));
        }
        Ok(CrisisTypeProfile { type_class, features })
    }

    pub fn type_class(&self) -> &Iri {
        &self.type_class
    }

    pub fn features(&self) -> &BTreeSet<Iri> {
        &self.features
    }
}

/// Reads profiles from `(type, cm:characteristicFeature, feature)` facts.
pub fn profiles_from_store(store: &TripleStore, schema: &OntologySchema) -> Result<Vec<CrisisTypeProfile>, OntologyError> {
    let pattern = TriplePattern::new(Term::var("t"), Iri::cm("characteristicFeature"), Term::var("f"));
    let mut grouped: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
    for t in store.match_pattern(&pattern) {
        if let (Term::Iri(class), Term::Iri(feature)) = (t.subject, t.object) {
            grouped.entry(class).or_default().insert(feature);
        }
    }
    grouped.into_iter().map(|(class, features)| CrisisTypeProfile::new(schema, class, features)).collect()
}

/// Jaccard similarity kept as an exact ratio so ranking never depends on
/// floating-point rounding.
#[derive(Debug, Clone, Copy)]
pub struct JaccardScore {
    pub intersection: usize,
    pub union: usize,
}

impl JaccardScore {
    pub fn value(self) -> f64 {
        if self.union == 0 {
            0.0
        } else {
            self.intersection as f64 / self.union as f64
        }
    }

    pub fn at_least(self, threshold: f64) -> bool {
        self.intersection as f64 >= threshold * self.union as f64
    }
}

impl PartialEq for JaccardScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for JaccardScore {}

impl PartialOrd for JaccardScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for JaccardScore {
    fn cmp(&self, other: &Self) -> Ordering {
        // a/b vs c/d  <=>  a*d vs c*b (denominators are positive in practice;
        // a zero union scores 0)
        let lhs = self.intersection * other.union.max(1);
        let rhs = other.intersection * self.union.max(1);
        lhs.cmp(&rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub type_class: Iri,
    pub score: JaccardScore,
    /// Profile features that were observed.
    pub matched: BTreeSet<Iri>,
    /// Profile features that were not observed.
    pub missing: BTreeSet<Iri>,
}

/// Scores every profile against the observed features and ranks them by
/// descending score, ties broken by ascending class identifier.
pub fn match_crisis_type(profiles: &[CrisisTypeProfile], observed: &BTreeSet<Iri>) -> Result<Vec<MatchResult>, OntologyError> {
    if observed.is_empty() {
        return Err(OntologyError::EmptyObservation);
    }
    let mut ranked: Vec<MatchResult> = profiles
        .iter()
        .map(|p| {
            let matched: BTreeSet<Iri> = p.features.intersection(observed).cloned().collect();
            let missing: BTreeSet<Iri> = p.features.difference(observed).cloned().collect();
            let union = p.features.len() + observed.len() - matched.len();
            MatchResult {
                type_class: p.type_class.clone(),
                score: JaccardScore { intersection: matched.len(), union },
                matched,
                missing,
            }
        })
        .collect();
    ranked.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.type_class.cmp(&b.type_class)));
    Ok(ranked)
}
