//! RDF-style terms: IRIs, typed literals and query variables.
//!
//! Terms order canonically: every IRI sorts before every literal, literals
//! compare by lexical form and then by datatype, and variables sort last.
//! Result sets and match output rely on this ordering.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const CM_NS: &str = "http://crisismesh.example/ontology#";
pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";

/// Built-in prefix table. Prefixed names are expanded on input and
/// compacted again on output.
pub const PREFIXES: [(&str, &str); 2] = [("cm", CM_NS), ("rdf", RDF_NS)];

fn is_local_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '-'
}

/// A namespaced identifier, stored fully expanded.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    /// Wraps an already expanded identifier. No validation happens here;
    /// the store rejects invalid identifiers on insert.
    pub fn new(iri: impl AsRef<str>) -> Self {
        Iri(Arc::from(iri.as_ref()))
    }

    /// Identifier in the crisis-management namespace.
    pub fn cm(local: &str) -> Self {
        Iri(Arc::from(format!("{CM_NS}{local}")))
    }

    pub fn rdf_type() -> Self {
        Iri(Arc::from(format!("{RDF_NS}type")))
    }

    /// Expands `prefix:local` through the prefix table. Returns `None` for
    /// unknown prefixes and empty or malformed local parts.
    pub fn from_prefixed(name: &str) -> Option<Self> {
        let (prefix, local) = name.split_once(':')?;
        let ns = PREFIXES.iter().find(|(p, _)| *p == prefix)?.1;
        if local.is_empty() || !local.chars().all(is_local_char) {
            return None;
        }
        Some(Iri(Arc::from(format!("{ns}{local}"))))
    }

    /// Accepts either a prefixed name or an `<absolute>` form.
    pub fn parse(text: &str) -> Option<Self> {
        if let Some(inner) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
            let iri = Iri::new(inner);
            return iri.is_valid().then_some(iri);
        }
        Self::from_prefixed(text)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_valid(&self) -> bool {
        !self.0.is_empty() && !self.0.chars().any(char::is_whitespace)
    }

    /// Local part after a known namespace, if any.
    pub fn local_name(&self) -> Option<&str> {
        PREFIXES
            .iter()
            .find_map(|(_, ns)| self.0.strip_prefix(ns))
            .filter(|local| !local.is_empty() && local.chars().all(is_local_char))
    }

    /// Prefixed form when a table entry applies, `<absolute>` otherwise.
    pub fn compact(&self) -> String {
        for (prefix, ns) in PREFIXES {
            if let Some(local) = self.0.strip_prefix(ns) {
                if !local.is_empty() && local.chars().all(is_local_char) {
                    return format!("{prefix}:{local}");
                }
            }
        }
        format!("<{}>", self.0)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.compact())
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Iri({})", self.compact())
    }
}

impl Serialize for Iri {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.compact())
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Iri::parse(&text).ok_or_else(|| serde::de::Error::custom(format!("invalid IRI `{text}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Datatype {
    String,
    Integer,
    Decimal,
    Boolean,
}

impl Datatype {
    pub fn name(self) -> &'static str {
        match self {
            Datatype::String => "string",
            Datatype::Integer => "integer",
            Datatype::Decimal => "decimal",
            Datatype::Boolean => "boolean",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "string" => Some(Datatype::String),
            "integer" => Some(Datatype::Integer),
            "decimal" => Some(Datatype::Decimal),
            "boolean" => Some(Datatype::Boolean),
            _ => None,
        }
    }
}

impl fmt::Display for Datatype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lexical form plus datatype tag.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Datatype,
}

impl Literal {
    pub fn new(lexical: impl AsRef<str>, datatype: Datatype) -> Self {
        Literal { lexical: Arc::from(lexical.as_ref()), datatype }
    }

    pub fn string(value: impl AsRef<str>) -> Self {
        Self::new(value, Datatype::String)
    }

    pub fn integer(value: i64) -> Self {
        Self::new(value.to_string(), Datatype::Integer)
    }

    pub fn boolean(value: bool) -> Self {
        Self::new(if value { "true" } else { "false" }, Datatype::Boolean)
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Datatype {
        self.datatype
    }

    pub fn is_valid(&self) -> bool {
        match self.datatype {
            Datatype::String => true,
            Datatype::Integer => self.lexical.parse::<i64>().is_ok(),
            Datatype::Decimal => self.lexical.parse::<f64>().map(f64::is_finite).unwrap_or(false),
            Datatype::Boolean => matches!(&*self.lexical, "true" | "false"),
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        match self.datatype {
            Datatype::Integer => self.lexical.parse().ok(),
            _ => None,
        }
    }

    /// Numeric value for integer and decimal literals.
    pub fn as_number(&self) -> Option<f64> {
        match self.datatype {
            Datatype::Integer | Datatype::Decimal => {
                self.lexical.parse::<f64>().ok().filter(|v| v.is_finite())
            }
            _ => None,
        }
    }
}

fn escape_into(out: &mut String, text: &str) {
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            _ => out.push(c),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::with_capacity(self.lexical.len() + 2);
        out.push('"');
        escape_into(&mut out, &self.lexical);
        out.push('"');
        if self.datatype != Datatype::String {
            out.push_str("^^");
            out.push_str(self.datatype.name());
        }
        f.write_str(&out)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Literal({self})")
    }
}

/// Query variable name, stored without the leading `?`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: impl AsRef<str>) -> Self {
        let name = name.as_ref();
        Variable(Arc::from(name.strip_prefix('?').unwrap_or(name)))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal(Literal),
    Variable(Variable),
}

impl Term {
    pub fn iri(prefixed: &str) -> Self {
        Term::Iri(Iri::from_prefixed(prefixed).unwrap_or_else(|| Iri::new(prefixed)))
    }

    pub fn var(name: &str) -> Self {
        Term::Variable(Variable::new(name))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn as_variable(&self) -> Option<&Variable> {
        match self {
            Term::Variable(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_variable(&self) -> bool {
        matches!(self, Term::Variable(_))
    }
}

impl From<Iri> for Term {
    fn from(iri: Iri) -> Self {
        Term::Iri(iri)
    }
}

impl From<Literal> for Term {
    fn from(lit: Literal) -> Self {
        Term::Literal(lit)
    }
}

impl From<Variable> for Term {
    fn from(v: Variable) -> Self {
        Term::Variable(v)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => iri.fmt(f),
            Term::Literal(lit) => lit.fmt(f),
            Term::Variable(v) => v.fmt(f),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixed_names_expand_and_compact() {
        let iri = Iri::from_prefixed("cm:RoadAccident").unwrap();
        assert_eq!(iri.as_str(), format!("{CM_NS}RoadAccident"));
        assert_eq!(iri.compact(), "cm:RoadAccident");
        assert_eq!(Iri::rdf_type().compact(), "rdf:type");
        assert!(Iri::from_prefixed("xsd:int").is_none());
        assert!(Iri::from_prefixed("cm:").is_none());
        assert_eq!(Iri::new("urn:x:1").compact(), "<urn:x:1>");
    }

    #[test]
    fn iri_sorts_before_literal() {
        let a = Term::iri("cm:zzz");
        let b = Term::Literal(Literal::string("aaa"));
        assert!(a < b);
        assert!(b < Term::var("a"));
    }

    #[test]
    fn literal_validity() {
        assert!(Literal::new("42", Datatype::Integer).is_valid());
        assert!(!Literal::new("4.2", Datatype::Integer).is_valid());
        assert!(Literal::new("4.2", Datatype::Decimal).is_valid());
        assert!(!Literal::new("NaN", Datatype::Decimal).is_valid());
        assert!(!Literal::new("yes", Datatype::Boolean).is_valid());
    }

    #[test]
    fn literal_display_escapes() {
        let lit = Literal::string("say \"hi\"\n");
        assert_eq!(lit.to_string(), r#""say \"hi\"\n""#);
        assert_eq!(Literal::integer(3).to_string(), r#""3"^^integer"#);
    }
}
