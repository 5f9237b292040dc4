use std::collections::{BTreeMap, BTreeSet};

use crisismesh_core::ontology::{
    build_domain_ontology, instances_of, match_crisis_type, merge_context, validate, CrisisTypeProfile, OntologySchema,
};
use crisismesh_core::store::{load_document, Iri, Triple, TripleStore};
use crisismesh_testkit::gen::{random_dag, rng};
use crisismesh_testkit::oracle::{closure_matrix, jaccard_oracle};
use proptest::prelude::*;
use rand::Rng;

fn schema_from(nodes: &[Iri], edges: &[(Iri, Iri)]) -> OntologySchema {
    OntologySchema::new(nodes.iter().cloned().collect(), edges.iter().cloned().collect(), BTreeMap::new()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subclass_test_matches_closure_matrix(seed in any::<u64>()) {
        let (nodes, edges) = random_dag(&mut rng(seed), 50);
        let schema = schema_from(&nodes, &edges);
        let reach = closure_matrix(&nodes, &edges);
        for (i, a) in nodes.iter().enumerate() {
            for (j, b) in nodes.iter().enumerate() {
                prop_assert_eq!(schema.is_subclass_of(a, b).unwrap(), reach[i][j], "{} <= {}", a, b);
            }
        }
    }

    #[test]
    fn back_edge_makes_a_cycle(seed in any::<u64>()) {
        let (nodes, mut edges) = random_dag(&mut rng(seed), 30);
        if let Some((c, p)) = edges.first().cloned() {
            edges.push((p, c));
            prop_assert!(OntologySchema::new(nodes.into_iter().collect(), edges.into_iter().collect(), BTreeMap::new()).is_err());
        }
    }

    #[test]
    fn jaccard_scores_match_set_arithmetic(seed in any::<u64>()) {
        let (schema, doc) = build_domain_ontology();
        let mut store = TripleStore::new();
        load_document(&mut store, doc).unwrap();
        let mut r = rng(seed);
        let pool: Vec<Iri> = (0..8).map(|i| Iri::cm(&format!("F{i}"))).collect();
        let pick = |r: &mut rand_chacha::ChaCha8Rng| -> BTreeSet<Iri> {
            let s: BTreeSet<Iri> = pool.iter().filter(|_| r.gen_bool(0.4)).cloned().collect();
            if s.is_empty() { BTreeSet::from([pool[0].clone()]) } else { s }
        };
        let profiles = vec![
            CrisisTypeProfile::new(&schema, Iri::cm("RoadAccident"), pick(&mut r)).unwrap(),
            CrisisTypeProfile::new(&schema, Iri::cm("TerroristAttack"), pick(&mut r)).unwrap(),
        ];
        let observed = pick(&mut r);
        let ranked = match_crisis_type(&profiles, &observed).unwrap();
        for m in &ranked {
            let p = profiles.iter().find(|p| p.type_class() == &m.type_class).unwrap();
            let (i, u) = jaccard_oracle(p.features(), &observed);
            prop_assert_eq!((m.score.intersection, m.score.union), (i, u));
            prop_assert_eq!(m.score.at_least(0.5), 2 * i >= u);
        }
        prop_assert!(ranked.windows(2).all(|w| w[0].score >= w[1].score));
    }

    #[test]
    fn merge_is_order_free(seed in any::<u64>()) {
        let mut r = rng(seed);
        let facts = |r: &mut rand_chacha::ChaCha8Rng| -> BTreeSet<Triple> {
            (0..r.gen_range(0..10)).map(|_| Triple::new(Iri::cm(&format!("s{}", r.gen_range(0..4))), Iri::cm("p"), Iri::cm(&format!("o{}", r.gen_range(0..4))))).collect()
        };
        let (a, b) = (facts(&mut r), facts(&mut r));
        let mut left = TripleStore::new();
        let mut right = TripleStore::new();
        merge_context(&mut left, &a, &b).unwrap();
        merge_context(&mut right, &b, &a).unwrap();
        let once = left.clone();
        merge_context(&mut left, &a, &b).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left, once);
    }
}

#[test]
fn threshold_boundary_is_inclusive() {
    let (schema, _) = build_domain_ontology();
    let set = |xs: &[&str]| xs.iter().map(|x| Iri::cm(x)).collect::<BTreeSet<_>>();
    let profile = CrisisTypeProfile::new(&schema, Iri::cm("RoadAccident"), set(&["A", "B"])).unwrap();
    let ranked = match_crisis_type(&[profile], &set(&["A"])).unwrap();
    assert_eq!(jaccard_oracle(&set(&["A", "B"]), &set(&["A"])), (1, 2));
    assert!(ranked[0].score.at_least(0.5));
}

#[test]
fn five_actor_instances_in_seed() {
    let (schema, doc) = build_domain_ontology();
    let mut store = TripleStore::new();
    load_document(&mut store, doc).unwrap();
    let actors = instances_of(&store, &schema, &Iri::cm("Actor")).unwrap();
    let names: Vec<String> = actors.iter().map(|a| a.to_string()).collect();
    assert_eq!(names, ["cm:citizen-1", "cm:expert-1", "cm:hospital-1", "cm:investigator-1", "cm:police-1"]);
    assert!(validate(&store, &schema).is_empty());
}
