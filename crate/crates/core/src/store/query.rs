//! Basic-graph-pattern queries.
//!
//! Grammar (keywords case-insensitive, whitespace-insensitive):
//!
//! ```text
//! query   := SELECT ( '*' | var+ ) WHERE '{' item ( '.' item )* '.'? '}'
//! item    := term term term | FILTER '('? var op constant ')'?
//! op      := '=' | '!=' | '<' | '>'
//! ```
//!
//! Terms are `?var`, prefixed names (`cm:`, `rdf:`), `<absolute>` IRIs,
//! quoted literals with an optional `^^datatype`, bare numbers and
//! `true`/`false`.

use std::collections::BTreeSet;
use std::fmt;

use super::lexer::{tokenize, ParseError, Spanned, Tok};
use super::term::{Literal, Term, Variable};
use super::triple::{Bindings, TriplePattern, TripleStore};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QueryError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("variable {0} does not appear in any pattern")]
    UnboundVariable(Variable),
    #[error("query has no triple patterns")]
    NoPatterns,
    #[error("filter on {variable} compares non-numeric term {term} with `{op}`")]
    TypeMismatch { variable: Variable, term: Term, op: Comparator },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Gt,
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Gt => ">",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Filter {
    pub variable: Variable,
    pub op: Comparator,
    pub value: Literal,
}

impl Filter {
    /// `=`/`!=` compare numerically when both sides are numbers and by term
    /// identity otherwise. `<`/`>` require numbers on both sides.
    pub fn test(&self, bound: &Term) -> Result<bool, QueryError> {
        let bound_num = bound.as_literal().and_then(Literal::as_number);
        let value_num = self.value.as_number();
        match self.op {
            Comparator::Eq | Comparator::Ne => {
                let equal = match (bound_num, value_num) {
                    (Some(a), Some(b)) => a == b,
                    _ => bound.as_literal() == Some(&self.value),
                };
                Ok(equal == (self.op == Comparator::Eq))
            }
            Comparator::Lt | Comparator::Gt => match (bound_num, value_num) {
                (Some(a), Some(b)) => Ok(if self.op == Comparator::Lt { a < b } else { a > b }),
                _ => Err(QueryError::TypeMismatch {
                    variable: self.variable.clone(),
                    term: bound.clone(),
                    op: self.op,
                }),
            },
        }
    }
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FILTER {} {} {}", self.variable, self.op, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Projection {
    All,
    Vars(Vec<Variable>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Query {
    projection: Projection,
    patterns: Vec<TriplePattern>,
    filters: Vec<Filter>,
}

impl Query {
    /// Builds a query, checking that patterns exist and that every selected
    /// or filtered variable occurs in some pattern.
    pub fn new(projection: Projection, patterns: Vec<TriplePattern>, filters: Vec<Filter>) -> Result<Self, QueryError> {
        if patterns.is_empty() {
            return Err(QueryError::NoPatterns);
        }
        let bound: BTreeSet<&Variable> = patterns.iter().flat_map(TriplePattern::variables).collect();
        let selected = match &projection {
            Projection::All => &[][..],
            Projection::Vars(vars) => &vars[..],
        };
        for v in selected.iter().chain(filters.iter().map(|f| &f.variable)) {
            if !bound.contains(v) {
                return Err(QueryError::UnboundVariable(v.clone()));
            }
        }
        Ok(Query { projection, patterns, filters })
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    pub fn patterns(&self) -> &[TriplePattern] {
        &self.patterns
    }

    pub fn filters(&self) -> &[Filter] {
        &self.filters
    }

    /// Same query with patterns in a different order.
    pub fn with_patterns(&self, patterns: Vec<TriplePattern>) -> Result<Self, QueryError> {
        Query::new(self.projection.clone(), patterns, self.filters.clone())
    }

    /// Output columns: the selected variables, or every pattern variable in
    /// order of first appearance for `SELECT *`.
    pub fn columns(&self) -> Vec<Variable> {
        match &self.projection {
            Projection::Vars(vars) => vars.clone(),
            Projection::All => {
                let mut seen = Vec::new();
                for v in self.patterns.iter().flat_map(TriplePattern::variables) {
                    if !seen.contains(v) {
                        seen.push(v.clone());
                    }
                }
                seen
            }
        }
    }
}

impl fmt::Display for Query {
    /// Canonical single-line form; parsing it yields an identical query.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT")?;
        match &self.projection {
            Projection::All => f.write_str(" *")?,
            Projection::Vars(vars) => {
                for v in vars {
                    write!(f, " {v}")?;
                }
            }
        }
        f.write_str(" WHERE {")?;
        let items = self
            .patterns
            .iter()
            .map(ToString::to_string)
            .chain(self.filters.iter().map(ToString::to_string));
        for (i, item) in items.enumerate() {
            if i > 0 {
                f.write_str(" .")?;
            }
            write!(f, " {item}")?;
        }
        f.write_str(" }")
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks.get(self.pos).map(|s| (s.line, s.column)).unwrap_or(self.end)
    }

    fn error(&self, expected: &str) -> ParseError {
        let (line, column) = self.here();
        ParseError::new(line, column, expected)
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Word(w)) if w.eq_ignore_ascii_case(kw))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.is_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(kw))
        }
    }

    fn punct(&mut self, tok: Tok, expected: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn term(&mut self, expected: &str) -> Result<Term, ParseError> {
        match self.peek() {
            Some(Tok::Term(t)) => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            _ => Err(self.error(expected)),
        }
    }

    fn variable(&mut self) -> Result<Variable, ParseError> {
        match self.peek() {
            Some(Tok::Term(Term::Variable(v))) => {
                let v = v.clone();
                self.pos += 1;
                Ok(v)
            }
            _ => Err(self.error("variable")),
        }
    }

    fn filter(&mut self) -> Result<Filter, ParseError> {
        let parens = self.peek() == Some(&Tok::LParen);
        if parens {
            self.pos += 1;
        }
        let variable = self.variable()?;
        let op = match self.peek() {
            Some(Tok::Eq) => Comparator::Eq,
            Some(Tok::Ne) => Comparator::Ne,
            Some(Tok::Lt) => Comparator::Lt,
            Some(Tok::Gt) => Comparator::Gt,
            _ => return Err(self.error("comparator (=, !=, <, >)")),
        };
        self.pos += 1;
        let value = match self.peek() {
            Some(Tok::Term(Term::Literal(lit))) => lit.clone(),
            _ => return Err(self.error("literal constant")),
        };
        self.pos += 1;
        if parens {
            self.punct(Tok::RParen, "`)`")?;
        }
        Ok(Filter { variable, op, value })
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        self.keyword("SELECT")?;
        let projection = if self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            Projection::All
        } else {
            let mut vars = vec![self.variable().map_err(|_| self.error("`*` or variable"))?];
            while let Some(Tok::Term(Term::Variable(_))) = self.peek() {
                vars.push(self.variable()?);
            }
            Projection::Vars(vars)
        };
        self.keyword("WHERE")?;
        self.punct(Tok::LBrace, "`{`")?;
        let mut patterns = Vec::new();
        let mut filters = Vec::new();
        loop {
            if self.peek() == Some(&Tok::RBrace) && !(patterns.is_empty() && filters.is_empty()) {
                self.pos += 1;
                break;
            }
            if self.is_keyword("FILTER") {
                self.pos += 1;
                filters.push(self.filter()?);
            } else {
                let s = self.term("triple pattern or FILTER")?;
                let p = self.term("predicate")?;
                let o = self.term("object")?;
                if s.as_literal().is_some() {
                    return Err(QueryError::Parse(ParseError::new(
                        self.toks[self.pos - 3].line,
                        self.toks[self.pos - 3].column,
                        "IRI or variable in subject position",
                    )));
                }
                if p.as_literal().is_some() {
                    return Err(QueryError::Parse(ParseError::new(
                        self.toks[self.pos - 2].line,
                        self.toks[self.pos - 2].column,
                        "IRI or variable in predicate position",
                    )));
                }
                patterns.push(TriplePattern::new(s, p, o));
            }
            match self.peek() {
                Some(Tok::Dot) => self.pos += 1,
                Some(Tok::RBrace) => {}
                _ => return Err(QueryError::Parse(self.error("`.` or `}`"))),
            }
        }
        if self.pos != self.toks.len() {
            return Err(QueryError::Parse(self.error("end of query")));
        }
        Query::new(projection, patterns, filters)
    }
}

/// Parses query text into a validated [`Query`].
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let toks = tokenize(text, 1)?;
    let end = text
        .lines()
        .enumerate()
        .last()
        .map(|(i, l)| (i + 1, l.chars().count() + 1))
        .unwrap_or((1, 1));
    Parser { toks, pos: 0, end }.query()
}

/// Projected, deduplicated rows in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultSet {
    pub columns: Vec<Variable>,
    pub rows: Vec<Vec<Term>>,
}

impl ResultSet {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Value bound to `var` in row `row`.
    pub fn get(&self, row: usize, var: &str) -> Option<&Term> {
        let col = self.columns.iter().position(|c| c.name() == var.trim_start_matches('?'))?;
        self.rows.get(row).map(|r| &r[col])
    }

    /// Rows as variable-to-term maps.
    pub fn bindings(&self) -> impl Iterator<Item = Vec<(Variable, Term)>> + '_ {
        self.rows.iter().map(|row| self.columns.iter().cloned().zip(row.iter().cloned()).collect())
    }

    /// Tab-separated table: header line of variables, then one line per row.
    pub fn to_tsv(&self) -> String {
        let mut out = self.columns.iter().map(ToString::to_string).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(ToString::to_string).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Evaluates `query` as the natural join of its patterns, bound left to
/// right through the store indexes. Filters apply to complete solutions.
pub fn evaluate(store: &TripleStore, query: &Query) -> Result<ResultSet, QueryError> {
    let mut solutions: Vec<Bindings> = vec![Bindings::new()];
    for pattern in &query.patterns {
        let mut next = Vec::new();
        for solution in &solutions {
            let bound = pattern.substitute(solution);
            for triple in store.match_pattern(&bound) {
                if let Some(extra) = bound.unify(&triple) {
                    let mut merged = solution.clone();
                    merged.extend(extra);
                    next.push(merged);
                }
            }
        }
        if next.is_empty() {
            solutions = next;
            break;
        }
        solutions = next;
    }

    let columns = query.columns();
    let mut rows = BTreeSet::new();
    'solutions: for solution in solutions {
        for filter in &query.filters {
            let bound = &solution[&filter.variable];
            if !filter.test(bound)? {
                continue 'solutions;
            }
        }
        rows.insert(columns.iter().map(|c| solution[c].clone()).collect::<Vec<_>>());
    }
    Ok(ResultSet { columns, rows: rows.into_iter().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::term::Datatype;
    use crate::store::triple::Triple;

    #[test]
    fn parses_minimal_query() {
        let q = parse_query("SELECT ?a WHERE { ?a rdf:type cm:Actor }").unwrap();
        assert_eq!(q.projection(), &Projection::Vars(vec![Variable::new("a")]));
        assert_eq!(q.patterns().len(), 1);
        assert!(q.filters().is_empty());
    }

    #[test]
    fn unselected_variable_is_rejected() {
        let err = parse_query("SELECT ?x WHERE { ?y rdf:type cm:Crisis }").unwrap_err();
        assert_eq!(err, QueryError::UnboundVariable(Variable::new("x")));
    }

    #[test]
    fn filter_query_round_trips() {
        let q = parse_query("SELECT ?s ?sev WHERE { ?s cm:hasSeverity ?sev . FILTER ?sev > 3 }").unwrap();
        assert_eq!(q.patterns().len(), 1);
        assert_eq!(q.filters().len(), 1);
        let printed = q.to_string();
        assert_eq!(printed, r#"SELECT ?s ?sev WHERE { ?s cm:hasSeverity ?sev . FILTER ?sev > "3"^^integer }"#);
        assert_eq!(parse_query(&printed).unwrap(), q);
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let q = parse_query("select * where {\n ?a ?b ?c .\n filter (?c != \"x\") }").unwrap();
        assert_eq!(q.columns().len(), 3);
    }

    #[test]
    fn malformed_query_reports_position() {
        let err = parse_query("SELECT ?a\nWHERE { ?a rdf:type }").unwrap_err();
        match err {
            QueryError::Parse(p) => assert_eq!((p.line, p.column, p.expected.as_str()), (2, 21, "object")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_query("SELECT WHERE { ?a ?b ?c }"), Err(QueryError::Parse(_))));
        assert!(matches!(parse_query("SELECT ?a WHERE { }"), Err(QueryError::Parse(_))));
        assert!(matches!(parse_query("SELECT ?a WHERE { ?a ?b ?c } extra"), Err(QueryError::Parse(_))));
    }

    #[test]
    fn empty_store_yields_no_rows() {
        let q = parse_query("SELECT ?c WHERE { ?c rdf:type cm:RoadAccident }").unwrap();
        let rs = evaluate(&TripleStore::new(), &q).unwrap();
        assert!(rs.is_empty());
        assert_eq!(rs.to_tsv(), "?c\n");
    }

    #[test]
    fn single_match() {
        let mut store = TripleStore::new();
        store.insert(Triple::new(Term::iri("cm:acc1"), Term::iri("rdf:type"), Term::iri("cm:RoadAccident"))).unwrap();
        let q = parse_query("SELECT ?c WHERE { ?c rdf:type cm:RoadAccident }").unwrap();
        let rs = evaluate(&store, &q).unwrap();
        assert_eq!(rs.rows, vec![vec![Term::iri("cm:acc1")]]);
    }

    #[test]
    fn numeric_comparison_on_string_is_type_mismatch() {
        let mut store = TripleStore::new();
        store.insert(Triple::new(Term::iri("cm:a"), Term::iri("cm:v"), Literal::string("high"))).unwrap();
        let q = parse_query("SELECT ?v WHERE { cm:a cm:v ?v . FILTER ?v > 2 }").unwrap();
        assert!(matches!(evaluate(&store, &q), Err(QueryError::TypeMismatch { .. })));
    }

    #[test]
    fn numeric_equality_crosses_datatypes() {
        let f = Filter { variable: Variable::new("v"), op: Comparator::Eq, value: Literal::integer(3) };
        assert!(f.test(&Literal::new("3.0", Datatype::Decimal).into()).unwrap());
        assert!(!f.test(&Literal::string("3").into()).unwrap());
    }
}
