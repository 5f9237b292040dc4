//! Oracles and seeded generators shared by the integration tests, the
//! acceptance harness and the benches.

pub mod gen;
pub mod oracle;
