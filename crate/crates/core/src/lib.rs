//! Collaborative crisis decision support over an ontology-backed knowledge
//! store and a FIPA-ACL style multi-agent runtime.
//!
//! * [`store`]: triples, indexes and the basic-graph-pattern query language.
//! * [`ontology`]: the crisis domain schema, subclass reasoning, crisis-type
//!   matching and context merging.
//! * [`agents`]: registry, message bus, conversation protocol checks and the
//!   sniffer trace.
//! * [`pipeline`]: the five-phase decision process as a state machine.
//! * [`scenario`]: deterministic replay of timed scenarios into run reports.
//! * [`batch`]: data-parallel evaluation of many scenarios or queries.

pub mod agents;
pub mod batch;
pub mod ontology;
pub mod pipeline;
pub mod scenario;
pub mod store;

/// Bundled fixtures: the domain ontology and the road-accident scenario.
pub mod fixtures {
    pub const DOMAIN_SCHEMA: &str = include_str!("../fixtures/domain.schema.toml");
    pub const DOMAIN_FACTS: &str = include_str!("../fixtures/domain.triples");
    pub const ROAD_ACCIDENT_SCENARIO: &str = include_str!("../fixtures/road_accident.scenario");
    pub const ROAD_ACCIDENT_SNIFF: &str = include_str!("../fixtures/road_accident.sniff");
}
