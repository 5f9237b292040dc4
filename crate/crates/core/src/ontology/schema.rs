use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use super::OntologyError;
use crate::fixtures;
use crate::store::{Datatype, Iri};

/// Allowed object of a constrained property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Range {
    Class(Iri),
    Datatype(Datatype),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PropertyConstraint {
    pub domain: Option<Iri>,
    pub range: Option<Range>,
}

/// Classes, a subclass DAG and property domain/range constraints.
///
/// Immutable once built; the reflexive-transitive closure of the subclass
/// relation is computed up front.
#[derive(Debug, Clone)]
pub struct OntologySchema {
    classes: BTreeSet<Iri>,
    edges: BTreeSet<(Iri, Iri)>,
    properties: BTreeMap<Iri, PropertyConstraint>,
    // class -> every class reachable over child->parent edges, itself included
    ancestors: BTreeMap<Iri, BTreeSet<Iri>>,
}

impl OntologySchema {
    pub fn new(
        classes: BTreeSet<Iri>,
        edges: BTreeSet<(Iri, Iri)>,
        properties: BTreeMap<Iri, PropertyConstraint>,
    ) -> Result<Self, OntologyError> {
        let known = |c: &Iri| {
            if classes.contains(c) {
                Ok(())
            } else {
                Err(OntologyError::UnknownClass(c.clone()))
            }
        };
        for (child, parent) in &edges {
            known(child)?;
            known(parent)?;
        }
        for constraint in properties.values() {
            if let Some(domain) = &constraint.domain {
                known(domain)?;
            }
            if let Some(Range::Class(range)) = &constraint.range {
                known(range)?;
            }
        }

        let mut parents: BTreeMap<&Iri, Vec<&Iri>> = BTreeMap::new();
        let mut pending_children: BTreeMap<&Iri, usize> = classes.iter().map(|c| (c, 0)).collect();
        for (child, parent) in &edges {
            parents.entry(child).or_default().push(parent);
            *pending_children.get_mut(parent).expect("checked above") += 1;
        }

        // Kahn's algorithm from the leaves upward; classes left over sit on
        // a cycle.
        let mut ready: Vec<&Iri> = pending_children.iter().filter(|(_, &n)| n == 0).map(|(c, _)| *c).collect();
        let mut order = Vec::with_capacity(classes.len());
        while let Some(c) = ready.pop() {
            order.push(c);
            for p in parents.get(c).into_iter().flatten() {
                let n = pending_children.get_mut(p).expect("known class");
                *n -= 1;
                if *n == 0 {
                    ready.push(p);
                }
            }
        }
        if order.len() != classes.len() {
            let stuck = pending_children.iter().find(|(_, &n)| n > 0).map(|(c, _)| (*c).clone());
            return Err(OntologyError::Cycle(stuck.expect("some class remains on the cycle")));
        }

        // Roots come last in `order`; walk it backwards so parents are done
        // before their children.
        let mut ancestors: BTreeMap<Iri, BTreeSet<Iri>> = BTreeMap::new();
        for c in order.into_iter().rev() {
            let mut set = BTreeSet::from([c.clone()]);
            for p in parents.get(c).into_iter().flatten() {
                set.extend(ancestors[*p].iter().cloned());
            }
            ancestors.insert(c.clone(), set);
        }

        Ok(OntologySchema { classes, edges, properties, ancestors })
    }

    /// Parses a schema manifest (TOML with `classes`, `subclass` pairs and a
    /// `properties` table).
    pub fn from_manifest(text: &str) -> Result<Self, OntologyError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Manifest {
            classes: Vec<String>,
            #[serde(default)]
            subclass: Vec<(String, String)>,
            #[serde(default)]
            properties: BTreeMap<String, PropertyEntry>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct PropertyEntry {
            domain: Option<String>,
            range: Option<String>,
        }

        let manifest: Manifest = toml::from_str(text).map_err(|e| OntologyError::Manifest(e.to_string()))?;
        let iri = |name: &str| Iri::parse(name).ok_or_else(|| OntologyError::Manifest(format!("invalid IRI `{name}`")));
        let classes = manifest.classes.iter().map(|c| iri(c)).collect::<Result<_, _>>()?;
        let edges = manifest
            .subclass
            .iter()
            .map(|(c, p)| Ok((iri(c)?, iri(p)?)))
            .collect::<Result<_, OntologyError>>()?;
        let mut properties = BTreeMap::new();
        for (name, entry) in &manifest.properties {
            let domain = entry.domain.as_deref().map(iri).transpose()?;
            let range = match entry.range.as_deref() {
                None => None,
                Some(r) => Some(match Datatype::from_name(r) {
                    Some(dt) => Range::Datatype(dt),
                    None => Range::Class(iri(r)?),
                }),
            };
            properties.insert(iri(name)?, PropertyConstraint { domain, range });
        }
        Self::new(classes, edges, properties)
    }

    pub fn classes(&self) -> &BTreeSet<Iri> {
        &self.classes
    }

    pub fn subclass_edges(&self) -> &BTreeSet<(Iri, Iri)> {
        &self.edges
    }

    pub fn properties(&self) -> &BTreeMap<Iri, PropertyConstraint> {
        &self.properties
    }

    pub fn has_class(&self, class: &Iri) -> bool {
        self.classes.contains(class)
    }

    /// Reflexive, transitive subclass test.
    pub fn is_subclass_of(&self, a: &Iri, b: &Iri) -> Result<bool, OntologyError> {
        let ancestors = self.ancestors.get(a).ok_or_else(|| OntologyError::UnknownClass(a.clone()))?;
        if !self.classes.contains(b) {
            return Err(OntologyError::UnknownClass(b.clone()));
        }
        Ok(ancestors.contains(b))
    }

    /// Strict superclasses of `class`; empty for unknown classes.
    pub fn superclasses<'a>(&'a self, class: &'a Iri) -> impl Iterator<Item = &'a Iri> + 'a {
        self.ancestors.get(class).into_iter().flatten().filter(move |c| *c != class)
    }
}

/// The bundled crisis-management schema and its seed fact document.
pub fn build_domain_ontology() -> (OntologySchema, &'static str) {
    let schema = OntologySchema::from_manifest(fixtures::DOMAIN_SCHEMA).expect("bundled schema manifest is valid");
    (schema, fixtures::DOMAIN_FACTS)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(local: &str) -> Iri {
        Iri::cm(local)
    }

    #[test]
    fn road_accident_is_a_crisis() {
        let (schema, _) = build_domain_ontology();
        assert!(schema.has_class(&cm("RoadAccident")));
        assert!(schema.is_subclass_of(&cm("RoadAccident"), &cm("Crisis")).unwrap());
        assert!(!schema.is_subclass_of(&cm("Crisis"), &cm("RoadAccident")).unwrap());
    }

    #[test]
    fn phases_before_during_after() {
        let (schema, _) = build_domain_ontology();
        for phase in ["Before", "During", "After"] {
            assert!(schema.is_subclass_of(&cm(phase), &cm("Phase")).unwrap());
        }
    }

    #[test]
    fn required_seed_classes_present() {
        let (schema, _) = build_domain_ontology();
        let required = [
            "Crisis", "RoadAccident", "TerroristAttack", "Phase", "Before", "During", "After", "Mission", "Role",
            "Actor", "Expert", "Police", "TechnicalInvestigator", "Hospital", "Citizen", "Context", "Climate",
            "Geography", "DamageLevel", "Consequence", "Interaction", "Task", "Resource", "Plan", "Strategy",
        ];
        for class in required {
            assert!(schema.has_class(&cm(class)), "missing cm:{class}");
        }
        for actor in ["Expert", "Police", "TechnicalInvestigator", "Hospital", "Citizen"] {
            assert!(schema.is_subclass_of(&cm(actor), &cm("Actor")).unwrap());
        }
        for ctx in ["Climate", "Geography", "DamageLevel"] {
            assert!(schema.is_subclass_of(&cm(ctx), &cm("Context")).unwrap());
        }
    }

    #[test]
    fn reflexive_on_every_class() {
        let (schema, _) = build_domain_ontology();
        for c in schema.classes() {
            assert!(schema.is_subclass_of(c, c).unwrap());
        }
    }

    #[test]
    fn unknown_class_is_an_error() {
        let (schema, _) = build_domain_ontology();
        assert!(matches!(schema.is_subclass_of(&cm("Nope"), &cm("Crisis")), Err(OntologyError::UnknownClass(_))));
        assert!(matches!(schema.is_subclass_of(&cm("Crisis"), &cm("Nope")), Err(OntologyError::UnknownClass(_))));
    }

    #[test]
    fn cycles_are_rejected() {
        let classes = BTreeSet::from([cm("A"), cm("B"), cm("C")]);
        let edges = BTreeSet::from([(cm("A"), cm("B")), (cm("B"), cm("C")), (cm("C"), cm("A"))]);
        assert!(matches!(OntologySchema::new(classes, edges, BTreeMap::new()), Err(OntologyError::Cycle(_))));
    }

    #[test]
    fn edge_endpoints_must_be_classes() {
        let classes = BTreeSet::from([cm("A")]);
        let edges = BTreeSet::from([(cm("A"), cm("B"))]);
        assert_eq!(
            OntologySchema::new(classes, edges, BTreeMap::new()).unwrap_err(),
            OntologyError::UnknownClass(cm("B"))
        );
    }

    #[test]
    fn diamond_closure() {
        let classes = BTreeSet::from([cm("Top"), cm("L"), cm("R"), cm("Bottom")]);
        let edges = BTreeSet::from([
            (cm("L"), cm("Top")),
            (cm("R"), cm("Top")),
            (cm("Bottom"), cm("L")),
            (cm("Bottom"), cm("R")),
        ]);
        let schema = OntologySchema::new(classes, edges, BTreeMap::new()).unwrap();
        assert!(schema.is_subclass_of(&cm("Bottom"), &cm("Top")).unwrap());
        assert!(!schema.is_subclass_of(&cm("L"), &cm("R")).unwrap());
        assert_eq!(schema.superclasses(&cm("Bottom")).count(), 3);
    }

    #[test]
    fn manifest_rejects_unknown_keys() {
        assert!(matches!(
            OntologySchema::from_manifest("classes = []\nbogus = 1\n"),
            Err(OntologyError::Manifest(_))
        ));
    }
}
