//! Many independent runs or queries at once.
//!
//! With the `parallel` feature (on by default) work is spread over the rayon
//! thread pool; without it, or through the `_sequential` variants, items are
//! processed one after another. Output order always matches input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::pipeline::PipelineConfig;
use crate::scenario::{run, RunReport, Scenario};
use crate::store::{evaluate, Query, QueryError, ResultSet, TripleStore};

pub fn run_batch_sequential(scenarios: &[Scenario], config: Option<&PipelineConfig>) -> Vec<RunReport> {
    scenarios.iter().map(|s| run(s, config)).collect()
}

pub fn run_batch(scenarios: &[Scenario], config: Option<&PipelineConfig>) -> Vec<RunReport> {
    #[cfg(feature = "parallel")]
    {
        scenarios.par_iter().map(|s| run(s, config)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_batch_sequential(scenarios, config)
    }
}

pub fn evaluate_batch_sequential(store: &TripleStore, queries: &[Query]) -> Vec<Result<ResultSet, QueryError>> {
    queries.iter().map(|q| evaluate(store, q)).collect()
}

pub fn evaluate_batch(store: &TripleStore, queries: &[Query]) -> Vec<Result<ResultSet, QueryError>> {
    #[cfg(feature = "parallel")]
    {
        queries.par_iter().map(|q| evaluate(store, q)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        evaluate_batch_sequential(store, queries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{DOMAIN_FACTS, ROAD_ACCIDENT_SCENARIO};
    use crate::scenario::replay_check;
    use crate::store::{load_document, parse_query};

    #[test]
    fn parallel_matches_sequential() {
        let s = Scenario::load(ROAD_ACCIDENT_SCENARIO).unwrap();
        let batch = vec![s.clone(), s.clone(), s];
        let par = run_batch(&batch, None);
        let seq = run_batch_sequential(&batch, None);
        assert_eq!(par.len(), 3);
        assert!(par.iter().zip(&seq).all(|(a, b)| replay_check(a, b)));
    }

    #[test]
    fn query_batch_keeps_order() {
        let mut store = TripleStore::new();
        load_document(&mut store, DOMAIN_FACTS).unwrap();
        let queries: Vec<Query> = ["SELECT ?r WHERE { ?r rdf:type cm:Role }", "SELECT ?t WHERE { ?t rdf:type cm:Task }"]
            .iter()
            .map(|q| parse_query(q).unwrap())
            .collect();
        let par = evaluate_batch(&store, &queries);
        assert_eq!(par, evaluate_batch_sequential(&store, &queries));
        assert_eq!(par[0].as_ref().unwrap().len(), 5);
    }
}
