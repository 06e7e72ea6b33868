//! Line-oriented N-Triples reader and canonical writer.
//!
//! The reader is lenient by default: malformed lines are recorded with
//! their line number and skipped. Strict mode stops at the first one.

use std::fmt;
use std::io::{self, BufRead, Write};

use super::term::{validate_blank_label, validate_iri, validate_language, Iri, Literal, Term, Triple};
use super::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorCategory {
    MalformedIri,
    UnterminatedLiteral,
    BadEscape,
    NonIriPredicate,
    InvalidSubject,
    InvalidBlankNode,
    InvalidLanguage,
    InvalidUtf8,
    Syntax,
}

impl fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            ErrorCategory::MalformedIri => "malformed-iri",
            ErrorCategory::UnterminatedLiteral => "unterminated-literal",
            ErrorCategory::BadEscape => "bad-escape",
            ErrorCategory::NonIriPredicate => "non-iri-predicate",
            ErrorCategory::InvalidSubject => "invalid-subject",
            ErrorCategory::InvalidBlankNode => "invalid-blank-node",
            ErrorCategory::InvalidLanguage => "invalid-language",
            ErrorCategory::InvalidUtf8 => "invalid-utf8",
            ErrorCategory::Syntax => "syntax",
        };
        f.write_str(name)
    }
}

/// One rejected statement.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct LineError {
    pub line: usize,
    pub category: ErrorCategory,
    pub message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.category, self.message)
    }
}

impl std::error::Error for LineError {}

#[derive(Debug, thiserror::Error)]
pub enum NTriplesError {
    #[error("read failed: {0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Line(LineError),
}

#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    /// Stop at the first malformed line.
    pub strict: bool,
    /// When set, every blank-node label `b` is rewritten to `<scope>_b`,
    /// keeping blank nodes from different documents apart.
    pub blank_scope: Option<String>,
}

impl ParseOptions {
    pub fn strict() -> Self {
        ParseOptions {
            strict: true,
            ..Default::default()
        }
    }

    pub fn scoped(mut self, scope: impl Into<String>) -> Self {
        self.blank_scope = Some(scope.into());
        self
    }
}

#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub graph: Graph,
    pub errors: Vec<LineError>,
}

pub fn parse_ntriples<R: BufRead>(mut reader: R, options: &ParseOptions) -> Result<ParseOutcome, NTriplesError> {
    let mut triples = Vec::new();
    let mut errors = Vec::new();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let result = match std::str::from_utf8(&buf) {
            Ok(line) => parse_line(line, options.blank_scope.as_deref()),
            Err(e) => Err((ErrorCategory::InvalidUtf8, e.to_string())),
        };
        match result {
            Ok(Some(triple)) => triples.push(triple),
            Ok(None) => {}
            Err((category, message)) => {
                let err = LineError {
                    line: line_no,
                    category,
                    message,
                };
                if options.strict {
                    return Err(NTriplesError::Line(err));
                }
                errors.push(err);
            }
        }
    }
    Ok(ParseOutcome {
        graph: Graph::from_triples(triples),
        errors,
    })
}

pub fn parse_ntriples_str(input: &str, options: &ParseOptions) -> Result<ParseOutcome, NTriplesError> {
    parse_ntriples(input.as_bytes(), options)
}

/// Canonical form: one statement per line, lines sorted bytewise, each
/// terminated by `\n`.
pub fn write_ntriples<W: Write>(graph: &Graph, mut out: W) -> io::Result<()> {
    let mut lines: Vec<String> = graph.iter().map(Triple::to_string).collect();
    lines.sort_unstable();
    for line in lines {
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn serialize_ntriples(graph: &Graph) -> Vec<u8> {
    let mut out = Vec::with_capacity(graph.len() * 96);
    write_ntriples(graph, &mut out).expect("writing to a Vec cannot fail");
    out
}

type LineResult<T> = Result<T, (ErrorCategory, String)>;

fn parse_line(line: &str, scope: Option<&str>) -> LineResult<Option<Triple>> {
    let mut cur = Cursor { src: line, pos: 0 };
    cur.skip_ws();
    if cur.at_end() || cur.peek() == Some('#') {
        return Ok(None);
    }

    let subject = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => cur.blank(scope)?,
        Some('"') => {
            return Err((ErrorCategory::InvalidSubject, "literal in subject position".into()));
        }
        _ => return Err((ErrorCategory::InvalidSubject, cur.context("expected subject"))),
    };
    cur.require_ws()?;

    let predicate = match cur.peek() {
        Some('<') => cur.iri()?,
        _ => return Err((ErrorCategory::NonIriPredicate, cur.context("predicate must be an IRI"))),
    };
    cur.require_ws()?;

    let object = match cur.peek() {
        Some('<') => Term::Iri(cur.iri()?),
        Some('_') => cur.blank(scope)?,
        Some('"') => Term::Literal(cur.literal()?),
        _ => return Err((ErrorCategory::Syntax, cur.context("expected object"))),
    };
    cur.skip_ws();
    if cur.bump() != Some('.') {
        return Err((ErrorCategory::Syntax, "missing terminating '.'".into()));
    }
    cur.skip_ws();
    if !cur.at_end() && cur.peek() != Some('#') {
        return Err((ErrorCategory::Syntax, cur.context("trailing content")));
    }

    let triple = Triple::new(subject, predicate, object)
        .map_err(|e| (ErrorCategory::InvalidSubject, e.to_string()))?;
    Ok(Some(triple))
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl Cursor<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t' | '\r' | '\n')) {
            self.pos += 1;
        }
    }

    fn require_ws(&mut self) -> LineResult<()> {
        let before = self.pos;
        self.skip_ws();
        if self.pos == before {
            return Err((ErrorCategory::Syntax, self.context("expected whitespace")));
        }
        Ok(())
    }

    fn context(&self, what: &str) -> String {
        let rest: String = self.src[self.pos..].trim_end().chars().take(24).collect();
        format!("{what} at column {} near {rest:?}", self.pos + 1)
    }

    fn iri(&mut self) -> LineResult<Iri> {
        debug_assert_eq!(self.peek(), Some('<'));
        self.pos += 1;
        let mut value = String::new();
        loop {
            match self.bump() {
                None | Some('\n') => {
                    return Err((ErrorCategory::MalformedIri, "unterminated IRI".into()));
                }
                Some('>') => break,
                Some('\\') => match self.bump() {
                    Some('u') => value.push(self.unicode_escape(4)?),
                    Some('U') => value.push(self.unicode_escape(8)?),
                    other => {
                        return Err((
                            ErrorCategory::BadEscape,
                            format!("invalid escape in IRI: \\{}", other.map(String::from).unwrap_or_default()),
                        ));
                    }
                },
                Some(c) => value.push(c),
            }
        }
        validate_iri(&value).map_err(|e| (ErrorCategory::MalformedIri, e.to_string()))?;
        Ok(Iri::new(value).expect("validated"))
    }

    fn blank(&mut self, scope: Option<&str>) -> LineResult<Term> {
        if !self.src[self.pos..].starts_with("_:") {
            return Err((ErrorCategory::InvalidBlankNode, self.context("expected '_:'")));
        }
        self.pos += 2;
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || matches!(c, '_' | '-' | '.')) {
            self.bump();
        }
        // a trailing '.' is the statement terminator, not part of the label
        while self.pos > start && self.src[..self.pos].ends_with('.') {
            self.pos -= 1;
        }
        let label = &self.src[start..self.pos];
        validate_blank_label(label).map_err(|e| (ErrorCategory::InvalidBlankNode, e.to_string()))?;
        let term = match scope {
            Some(scope) => Term::blank(format!("{scope}_{label}")),
            None => Term::blank(label),
        };
        term.map_err(|e| (ErrorCategory::InvalidBlankNode, e.to_string()))
    }

    fn literal(&mut self) -> LineResult<Literal> {
        debug_assert_eq!(self.peek(), Some('"'));
        self.pos += 1;
        let mut lexical = String::new();
        loop {
            match self.bump() {
                None | Some('\n') | Some('\r') => {
                    return Err((ErrorCategory::UnterminatedLiteral, "literal is not closed".into()));
                }
                Some('"') => break,
                Some('\\') => {
                    let c = match self.bump() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.unicode_escape(4)?,
                        Some('U') => self.unicode_escape(8)?,
                        None | Some('\n') => {
                            return Err((ErrorCategory::UnterminatedLiteral, "literal is not closed".into()));
                        }
                        Some(other) => {
                            return Err((ErrorCategory::BadEscape, format!("invalid escape \\{other}")));
                        }
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('^') => {
                if !self.src[self.pos..].starts_with("^^<") {
                    return Err((ErrorCategory::Syntax, self.context("expected '^^<datatype>'")));
                }
                self.pos += 2;
                let datatype = self.iri()?;
                Ok(Literal::typed(lexical, datatype))
            }
            Some('@') => {
                self.pos += 1;
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '-') {
                    self.pos += 1;
                }
                let tag = &self.src[start..self.pos];
                validate_language(tag).map_err(|e| (ErrorCategory::InvalidLanguage, e.to_string()))?;
                Ok(Literal::lang_tagged(lexical, tag).expect("validated"))
            }
            _ => Ok(Literal::simple(lexical)),
        }
    }

    fn unicode_escape(&mut self, digits: usize) -> LineResult<char> {
        let end = self.pos + digits;
        let hex = self
            .src
            .get(self.pos..end)
            .filter(|h| h.chars().all(|c| c.is_ascii_hexdigit()))
            .ok_or_else(|| (ErrorCategory::BadEscape, format!("expected {digits} hex digits")))?;
        let code = u32::from_str_radix(hex, 16).expect("hex digits");
        let c = char::from_u32(code)
            .ok_or_else(|| (ErrorCategory::BadEscape, format!("invalid code point U+{code:X}")))?;
        self.pos = end;
        Ok(c)
    }
}
