use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::RdfError;

/// An absolute IRI.
///
/// Cheap to clone: the string is shared.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(value: impl AsRef<str>) -> Result<Self, RdfError> {
        let value = value.as_ref();
        validate_iri(value)?;
        Ok(Iri(Arc::from(value)))
    }

    /// Accepts either a bare IRI or one wrapped in angle brackets.
    pub fn parse_lenient(value: &str) -> Result<Self, RdfError> {
        let trimmed = value.trim();
        let inner = trimmed
            .strip_prefix('<')
            .and_then(|s| s.strip_suffix('>'))
            .unwrap_or(trimmed);
        Iri::new(inner)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl fmt::Debug for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

impl AsRef<str> for Iri {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Iri {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Iri::parse_lenient(&raw).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn validate_iri(value: &str) -> Result<(), RdfError> {
    if value.is_empty() {
        return Err(RdfError::InvalidIri(value.to_owned(), "empty"));
    }
    if let Some(bad) = value.chars().find(|c| is_forbidden_iri_char(*c)) {
        let reason = if bad.is_whitespace() {
            "contains whitespace"
        } else if bad == '<' || bad == '>' {
            "contains an angle bracket"
        } else {
            "contains a forbidden character"
        };
        return Err(RdfError::InvalidIri(value.to_owned(), reason));
    }
    let scheme_end = value
        .find(':')
        .ok_or_else(|| RdfError::InvalidIri(value.to_owned(), "not absolute"))?;
    let scheme = &value[..scheme_end];
    let mut chars = scheme.chars();
    let scheme_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'));
    if !scheme_ok {
        return Err(RdfError::InvalidIri(value.to_owned(), "not absolute"));
    }
    Ok(())
}

fn is_forbidden_iri_char(c: char) -> bool {
    c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
}

pub(crate) fn validate_blank_label(label: &str) -> Result<(), RdfError> {
    let ok = !label.is_empty()
        && !label.starts_with(['.', '-'])
        && !label.ends_with('.')
        && label
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(RdfError::InvalidBlankNode(label.to_owned()))
    }
}

pub(crate) fn validate_language(tag: &str) -> Result<(), RdfError> {
    let mut parts = tag.split('-');
    let primary_ok = parts
        .next()
        .is_some_and(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphabetic()));
    if primary_ok && parts.all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric())) {
        Ok(())
    } else {
        Err(RdfError::InvalidLanguage(tag.to_owned()))
    }
}

/// A literal: lexical form plus at most one of datatype or language tag.
///
/// Equality is purely lexical: `"01"^^xsd:int` and `"1"^^xsd:int` differ.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Option<Iri>,
    language: Option<Arc<str>>,
}

impl Literal {
    pub fn simple(lexical: impl AsRef<str>) -> Self {
        Literal {
            lexical: Arc::from(lexical.as_ref()),
            datatype: None,
            language: None,
        }
    }

    pub fn typed(lexical: impl AsRef<str>, datatype: Iri) -> Self {
        Literal {
            lexical: Arc::from(lexical.as_ref()),
            datatype: Some(datatype),
            language: None,
        }
    }

    pub fn lang_tagged(lexical: impl AsRef<str>, language: impl AsRef<str>) -> Result<Self, RdfError> {
        validate_language(language.as_ref())?;
        Ok(Literal {
            lexical: Arc::from(lexical.as_ref()),
            datatype: None,
            language: Some(Arc::from(language.as_ref())),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&Iri> {
        self.datatype.as_ref()
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("\"")?;
        for c in self.lexical.chars() {
            match c {
                '"' => f.write_str("\\\"")?,
                '\\' => f.write_str("\\\\")?,
                '\n' => f.write_str("\\n")?,
                '\r' => f.write_str("\\r")?,
                c => write!(f, "{c}")?,
            }
        }
        f.write_str("\"")?;
        if let Some(dt) = &self.datatype {
            write!(f, "^^{dt}")?;
        } else if let Some(lang) = &self.language {
            write!(f, "@{lang}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// An RDF term. `Display` renders N-Triples syntax.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "TermRepr", into = "TermRepr")]
pub enum Term {
    Iri(Iri),
    BlankNode(Arc<str>),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl AsRef<str>) -> Result<Self, RdfError> {
        Iri::new(value).map(Term::Iri)
    }

    pub fn blank(label: impl AsRef<str>) -> Result<Self, RdfError> {
        validate_blank_label(label.as_ref())?;
        Ok(Term::BlankNode(Arc::from(label.as_ref())))
    }

    pub fn literal(lexical: impl AsRef<str>) -> Self {
        Term::Literal(Literal::simple(lexical))
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    /// Short string used for sorting and CSV cells: the IRI itself, `_:label`,
    /// or the literal's lexical form.
    pub fn lexical_key(&self) -> &str {
        match self {
            Term::Iri(iri) => iri.as_str(),
            Term::BlankNode(label) => label,
            Term::Literal(lit) => lit.lexical(),
        }
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

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => fmt::Display::fmt(iri, f),
            Term::BlankNode(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => fmt::Display::fmt(lit, f),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// JSON shape shared with SPARQL results: `{"type": "uri"|"bnode"|"literal", "value": ...}`.
#[derive(Serialize, Deserialize)]
pub struct TermRepr {
    #[serde(rename = "type")]
    pub kind: String,
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub datatype: Option<String>,
    #[serde(rename = "xml:lang", default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

impl TryFrom<TermRepr> for Term {
    type Error = RdfError;

    fn try_from(repr: TermRepr) -> Result<Self, Self::Error> {
        match repr.kind.as_str() {
            "uri" | "iri" => Term::iri(&repr.value),
            "bnode" => Term::blank(&repr.value),
            // SPARQL 1.0 JSON results used "typed-literal"
            "literal" | "typed-literal" => match (repr.language, repr.datatype) {
                (Some(lang), _) => Literal::lang_tagged(&repr.value, lang).map(Term::Literal),
                (None, Some(dt)) => Ok(Term::Literal(Literal::typed(&repr.value, Iri::new(dt)?))),
                (None, None) => Ok(Term::literal(&repr.value)),
            },
            other => Err(RdfError::UnknownTermKind(other.to_owned())),
        }
    }
}

impl From<Term> for TermRepr {
    fn from(term: Term) -> Self {
        match term {
            Term::Iri(iri) => TermRepr {
                kind: "uri".into(),
                value: iri.as_str().to_owned(),
                datatype: None,
                language: None,
            },
            Term::BlankNode(label) => TermRepr {
                kind: "bnode".into(),
                value: label.to_string(),
                datatype: None,
                language: None,
            },
            Term::Literal(lit) => TermRepr {
                kind: "literal".into(),
                value: lit.lexical().to_owned(),
                datatype: lit.datatype().map(|d| d.as_str().to_owned()),
                language: lit.language().map(str::to_owned),
            },
        }
    }
}

/// A statement. The predicate is an IRI by construction; the subject is
/// never a literal.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Iri, object: Term) -> Result<Self, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::LiteralSubject);
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Iri {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

impl fmt::Debug for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
