use std::fmt;

use super::vocab::{RDF_LANG_STRING, XSD_STRING};
use super::KgError;

/// Absolute IRI.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Iri(String);

impl Iri {
    /// Accepts IRIs with a scheme and none of the characters N-Triples
    /// forbids inside `<...>`.
    pub fn new(iri: impl Into<String>) -> Result<Iri, KgError> {
        let iri = iri.into();
        let scheme_ok = iri
            .split_once(':')
            .map(|(scheme, _)| {
                let mut chars = scheme.chars();
                chars.next().is_some_and(|c| c.is_ascii_alphabetic())
                    && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
            })
            .unwrap_or(false);
        let chars_ok = iri
            .chars()
            .all(|c| !matches!(c, '\u{0}'..='\u{20}' | '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\'));
        if scheme_ok && chars_ok {
            Ok(Iri(iri))
        } else {
            Err(KgError::InvalidIri(iri))
        }
    }

    pub(crate) fn new_unchecked(iri: String) -> Iri {
        Iri(iri)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl serde::Serialize for Iri {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> serde::Deserialize<'de> for Iri {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Iri, D::Error> {
        let s = String::deserialize(d)?;
        Iri::new(s).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    lexical: String,
    datatype: Iri,
    language: Option<String>,
}

impl Literal {
    pub fn string(lexical: impl Into<String>) -> Literal {
        Literal { lexical: lexical.into(), datatype: Iri::new_unchecked(XSD_STRING.into()), language: None }
    }

    pub fn typed(lexical: impl Into<String>, datatype: Iri) -> Literal {
        Literal { lexical: lexical.into(), datatype, language: None }
    }

    pub fn lang(lexical: impl Into<String>, language: &str) -> Result<Literal, KgError> {
        let ok = !language.is_empty()
            && language.split('-').enumerate().all(|(i, part)| {
                !part.is_empty()
                    && part.len() <= 8
                    && part.chars().all(|c| if i == 0 { c.is_ascii_alphabetic() } else { c.is_ascii_alphanumeric() })
            });
        if !ok {
            return Err(KgError::InvalidLanguageTag(language.to_string()));
        }
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Iri::new_unchecked(RDF_LANG_STRING.into()),
            language: Some(language.to_ascii_lowercase()),
        })
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &Iri {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }
}

/// Escapes a literal's lexical form for N-Triples and Turtle strings.
pub(crate) fn escape_lexical(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut quoted = String::with_capacity(self.lexical.len() + 2);
        quoted.push('"');
        escape_lexical(&self.lexical, &mut quoted);
        quoted.push('"');
        f.write_str(&quoted)?;
        match &self.language {
            Some(lang) => write!(f, "@{lang}"),
            None if self.datatype.as_str() == XSD_STRING => Ok(()),
            None => write!(f, "^^{}", self.datatype),
        }
    }
}

/// RDF term. `Display` gives the N-Triples form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Iri),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    pub fn blank(label: impl Into<String>) -> Result<Term, KgError> {
        let label = label.into();
        let ok = label.chars().next().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
            && label.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
            && !label.ends_with('.');
        if ok {
            Ok(Term::BlankNode(label))
        } else {
            Err(KgError::InvalidBlankNode(label))
        }
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => i.fmt(f),
            Term::BlankNode(b) => write!(f, "_:{b}"),
            Term::Literal(l) => l.fmt(f),
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Term {
        Term::Iri(i)
    }
}

impl From<Literal> for Term {
    fn from(l: Literal) -> Term {
        Term::Literal(l)
    }
}

/// Subject-predicate-object statement. Subjects are never literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    subject: Term,
    predicate: Iri,
    object: Term,
}

impl Triple {
    pub fn new(subject: impl Into<Term>, predicate: Iri, object: impl Into<Term>) -> Result<Triple, KgError> {
        let subject = subject.into();
        if subject.is_literal() {
            return Err(KgError::LiteralSubject(subject.to_string()));
        }
        Ok(Triple { subject, predicate, object: object.into() })
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

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iri_validation() {
        assert!(Iri::new("https://example.org/a%20b").is_ok());
        assert!(Iri::new("urn:isbn:123").is_ok());
        assert!(Iri::new("relative/path").is_err());
        assert!(Iri::new("https://example.org/a b").is_err());
        assert!(Iri::new("https://example.org/<x>").is_err());
        assert!(Iri::new("1http://x").is_err());
    }

    #[test]
    fn literal_forms() {
        assert_eq!(Literal::string("a\"b").to_string(), r#""a\"b""#);
        assert_eq!(Literal::string("x\\y\n\r\tz").to_string(), r#""x\\y\n\r\tz""#);
        assert_eq!(Literal::lang("Kraków", "PL").unwrap().to_string(), "\"Kraków\"@pl");
        let dt = Iri::new("http://www.w3.org/2001/XMLSchema#integer").unwrap();
        assert_eq!(Literal::typed("3", dt).to_string(), "\"3\"^^<http://www.w3.org/2001/XMLSchema#integer>");
        assert!(Literal::lang("x", "").is_err());
        assert!(Literal::lang("x", "en_US").is_err());
    }

    #[test]
    fn literal_subjects_rejected() {
        let p = Iri::new("http://p").unwrap();
        assert!(Triple::new(Literal::string("s"), p.clone(), Literal::string("o")).is_err());
        assert!(Triple::new(Term::blank("b0").unwrap(), p, Literal::string("o")).is_ok());
    }
}
