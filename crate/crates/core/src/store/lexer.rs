use std::fmt;

use super::term::{Datatype, Iri, Literal, Term, Variable};

/// Location-tagged parse failure shared by the document and query readers.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {line}, column {column}: expected {expected}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub expected: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, expected: impl Into<String>) -> Self {
        ParseError { line, column, expected: expected.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Term(Term),
    /// Bare word: keywords are matched case-insensitively by the parser.
    Word(String),
    Dot,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Star,
    Eq,
    Ne,
    Lt,
    Gt,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Term(t) => write!(f, "{t}"),
            Tok::Word(w) => f.write_str(w),
            Tok::Dot => f.write_str("."),
            Tok::LBrace => f.write_str("{"),
            Tok::RBrace => f.write_str("}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
            Tok::Star => f.write_str("*"),
            Tok::Eq => f.write_str("="),
            Tok::Ne => f.write_str("!="),
            Tok::Lt => f.write_str("<"),
            Tok::Gt => f.write_str(">"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Spanned {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    src: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Self {
        Cursor { chars: src.char_indices().peekable(), src, line, column: 1 }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn offset(&mut self) -> usize {
        self.chars.peek().map(|&(i, _)| i).unwrap_or(self.src.len())
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | ':')
}

/// Splits `src` into tokens. `#` comments run to end of line. `first_line`
/// lets line-oriented readers report absolute line numbers.
pub(crate) fn tokenize(src: &str, first_line: usize) -> Result<Vec<Spanned>, ParseError> {
    let mut cur = Cursor::new(src, first_line);
    let mut out = Vec::new();
    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let push = |out: &mut Vec<Spanned>, tok| out.push(Spanned { tok, line, column });
        match c {
            c if c.is_whitespace() => {
                cur.bump();
            }
            '#' => {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            }
            '.' => {
                cur.bump();
                push(&mut out, Tok::Dot);
            }
            '{' => {
                cur.bump();
                push(&mut out, Tok::LBrace);
            }
            '}' => {
                cur.bump();
                push(&mut out, Tok::RBrace);
            }
            '(' => {
                cur.bump();
                push(&mut out, Tok::LParen);
            }
            ')' => {
                cur.bump();
                push(&mut out, Tok::RParen);
            }
            '*' => {
                cur.bump();
                push(&mut out, Tok::Star);
            }
            '=' => {
                cur.bump();
                push(&mut out, Tok::Eq);
            }
            '!' => {
                cur.bump();
                if cur.peek() == Some('=') {
                    cur.bump();
                    push(&mut out, Tok::Ne);
                } else {
                    return Err(ParseError::new(line, column + 1, "`=` after `!`"));
                }
            }
            '>' => {
                cur.bump();
                push(&mut out, Tok::Gt);
            }
            '<' => {
                // `<abs:iri>` when a closing `>` follows with no whitespace,
                // otherwise the less-than comparator.
                let start = cur.offset();
                let rest = &src[start + 1..];
                let end = rest.find(|c: char| c == '>' || c.is_whitespace());
                match end {
                    Some(n) if n > 0 && rest[n..].starts_with('>') => {
                        let iri = Iri::new(&rest[..n]);
                        for _ in 0..n + 2 {
                            cur.bump();
                        }
                        push(&mut out, Tok::Term(Term::Iri(iri)));
                    }
                    _ => {
                        cur.bump();
                        push(&mut out, Tok::Lt);
                    }
                }
            }
            '?' => {
                cur.bump();
                let start = cur.offset();
                while cur.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    cur.bump();
                }
                let name = &src[start..cur.offset()];
                if name.is_empty() {
                    return Err(ParseError::new(line, column + 1, "variable name"));
                }
                push(&mut out, Tok::Term(Term::Variable(Variable::new(name))));
            }
            '"' => {
                let lit = lex_literal(&mut cur, line, column)?;
                push(&mut out, Tok::Term(Term::Literal(lit)));
            }
            c if c.is_ascii_digit() || c == '-' || c == '+' => {
                let start = cur.offset();
                cur.bump();
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                }
                let mut datatype = Datatype::Integer;
                // A dot followed by a digit continues a decimal; a bare dot
                // is a statement terminator.
                if cur.peek() == Some('.') {
                    let after = &src[cur.offset() + 1..];
                    if after.starts_with(|c: char| c.is_ascii_digit()) {
                        cur.bump();
                        while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                            cur.bump();
                        }
                        datatype = Datatype::Decimal;
                    }
                }
                let text = &src[start..cur.offset()];
                let lit = Literal::new(text.strip_prefix('+').unwrap_or(text), datatype);
                if !lit.is_valid() {
                    return Err(ParseError::new(line, column, "numeric literal"));
                }
                push(&mut out, Tok::Term(Term::Literal(lit)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = cur.offset();
                while cur.peek().is_some_and(is_word_char) {
                    cur.bump();
                }
                let word = &src[start..cur.offset()];
                let tok = if word.contains(':') {
                    match Iri::from_prefixed(word) {
                        Some(iri) => Tok::Term(Term::Iri(iri)),
                        None => {
                            return Err(ParseError::new(line, column, "prefixed name with a known prefix (cm:, rdf:)"))
                        }
                    }
                } else if word == "true" || word == "false" {
                    Tok::Term(Term::Literal(Literal::new(word, Datatype::Boolean)))
                } else {
                    Tok::Word(word.to_string())
                };
                push(&mut out, tok);
            }
            _ => return Err(ParseError::new(line, column, "term, keyword or punctuation")),
        }
    }
    Ok(out)
}

fn lex_literal(cur: &mut Cursor<'_>, line: usize, column: usize) -> Result<Literal, ParseError> {
    cur.bump();
    let mut text = String::new();
    loop {
        match cur.bump() {
            None | Some('\n') => return Err(ParseError::new(line, column, "closing `\"`")),
            Some('"') => break,
            Some('\\') => {
                let (l, c) = (cur.line, cur.column);
                match cur.bump() {
                    Some('"') => text.push('"'),
                    Some('\\') => text.push('\\'),
                    Some('n') => text.push('\n'),
                    Some('t') => text.push('\t'),
                    Some('r') => text.push('\r'),
                    _ => return Err(ParseError::new(l, c, "escape sequence")),
                }
            }
            Some(c) => text.push(c),
        }
    }
    let mut datatype = Datatype::String;
    if cur.peek() == Some('^') {
        let (l, c) = (cur.line, cur.column);
        cur.bump();
        if cur.bump() != Some('^') {
            return Err(ParseError::new(l, c, "`^^` datatype marker"));
        }
        let start = cur.offset();
        while cur.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            cur.bump();
        }
        let name = &cur.src[start..cur.offset()];
        datatype = Datatype::from_name(name)
            .ok_or_else(|| ParseError::new(l, c + 2, "datatype (string, integer, decimal, boolean)"))?;
    }
    let lit = Literal::new(text, datatype);
    if !lit.is_valid() {
        return Err(ParseError::new(line, column, format!("lexical form valid for {datatype}")));
    }
    Ok(lit)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        tokenize(src, 1).unwrap().into_iter().map(|s| s.tok).collect()
    }

    #[test]
    fn distinguishes_iri_brackets_from_less_than() {
        assert_eq!(toks("<urn:a>"), vec![Tok::Term(Term::Iri(Iri::new("urn:a")))]);
        assert_eq!(toks("?x < 3"), vec![Tok::Term(Term::var("x")), Tok::Lt, Tok::Term(Literal::integer(3).into())]);
    }

    #[test]
    fn number_before_terminator_stays_integer() {
        assert_eq!(toks("3 ."), vec![Tok::Term(Literal::integer(3).into()), Tok::Dot]);
        assert_eq!(toks("3."), vec![Tok::Term(Literal::integer(3).into()), Tok::Dot]);
        assert_eq!(toks("3.5"), vec![Tok::Term(Literal::new("3.5", Datatype::Decimal).into())]);
    }

    #[test]
    fn reports_position_of_bad_prefix() {
        let err = tokenize("cm:a\n  foo:b", 1).unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
    }

    #[test]
    fn typed_literal_checks_lexical_form() {
        assert!(tokenize(r#""x"^^integer"#, 1).is_err());
        assert_eq!(toks(r#""7"^^integer"#), vec![Tok::Term(Literal::integer(7).into())]);
    }
}
