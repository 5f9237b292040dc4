//! In-memory triple store and its basic-graph-pattern query language.

mod document;
mod lexer;
mod query;
mod term;
mod triple;

pub use document::{load_document, parse_document, write_document};
pub use lexer::ParseError;
pub use query::{evaluate, parse_query, Comparator, Filter, Projection, Query, QueryError, ResultSet};
pub use term::{Datatype, Iri, Literal, Term, Variable, CM_NS, PREFIXES, RDF_NS};
pub use triple::{Bindings, StoreError, Triple, TriplePattern, TripleStore};

/// Stored triples unifying with `pattern`, in canonical order.
pub fn match_pattern(store: &TripleStore, pattern: &TriplePattern) -> Vec<Triple> {
    store.match_pattern(pattern)
}
