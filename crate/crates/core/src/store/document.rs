//! Line-oriented triple documents: `<subject> <predicate> <object> .`
//! per line, `#` comments, blank lines ignored.

use super::lexer::{tokenize, ParseError, Tok};
use super::term::Term;
use super::triple::{Triple, TripleStore};

/// Parses a whole document without touching any store.
pub fn parse_document(text: &str) -> Result<Vec<Triple>, ParseError> {
    let mut triples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokenize(line, line_no)?;
        if toks.is_empty() {
            continue;
        }
        let at = |i: usize, expected: &str| {
            let (l, c) = toks.get(i).map(|s| (s.line, s.column)).unwrap_or((line_no, line.chars().count() + 1));
            ParseError::new(l, c, expected)
        };
        let term = |i: usize, expected: &str, allow_literal: bool| -> Result<Term, ParseError> {
            match toks.get(i).map(|s| &s.tok) {
                Some(Tok::Term(t @ Term::Iri(_))) => Ok(t.clone()),
                Some(Tok::Term(t @ Term::Literal(_))) if allow_literal => Ok(t.clone()),
                _ => Err(at(i, expected)),
            }
        };
        let subject = term(0, "IRI subject", false)?;
        let predicate = term(1, "IRI predicate", false)?;
        let object = term(2, "IRI or literal object", true)?;
        if toks.get(3).map(|s| &s.tok) != Some(&Tok::Dot) {
            return Err(at(3, "`.` terminating the statement"));
        }
        if toks.len() > 4 {
            return Err(at(4, "end of line"));
        }
        let triple = Triple::new(subject, predicate, object);
        if triple.validate().is_err() {
            return Err(at(0, "valid IRIs"));
        }
        triples.push(triple);
    }
    Ok(triples)
}

/// Loads a document into `store`. Either every statement is inserted or,
/// on a parse error, none is. Returns the number of newly inserted triples.
pub fn load_document(store: &mut TripleStore, text: &str) -> Result<usize, ParseError> {
    let triples = parse_document(text)?;
    Ok(store.insert_all(triples).expect("parsed triples are valid"))
}

/// Canonical serialization: one statement per line in canonical order.
pub fn write_document(store: &TripleStore) -> String {
    let mut out = String::new();
    for t in store.iter() {
        out.push_str(&t.to_string());
        out.push('\n');
    }
    out
}
