//! RDF knowledge graph: terms, an indexed triple set, graph construction
//! from enriched records, and N-Triples/Turtle serialization.
//!
//! The ontology has three modules, all under the `jdlo:` namespace:
//! provenance (descriptive fields, reusing `dcterms:`), physical
//! (page count, stain coverage, condition flags, pixel dimensions) and
//! visual (pages, typed regions, coordinates, section membership).

mod build;
mod graph;
mod ntriples;
mod term;
mod turtle;
pub mod vocab;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};
use thiserror::Error;

pub use build::{build_graph, sameas_triples};
pub use graph::KnowledgeGraph;
pub use ntriples::{parse_ntriples, serialize_ntriples};
pub use term::{Iri, Literal, Term, Triple};
pub use turtle::serialize_turtle;

/// The shipped ontology document.
pub const ONTOLOGY_TTL: &str = include_str!("../../../../ontology/jdlo.ttl");

#[derive(Debug, Error, PartialEq)]
pub enum KgError {
    #[error("IRI part must not be empty")]
    EmptyPart,
    #[error("{kind:?} IRIs take {expected} parts, got {got}")]
    WrongPartCount { kind: IriKind, expected: usize, got: usize },
    #[error("not an absolute IRI: {0}")]
    InvalidIri(String),
    #[error("invalid language tag '{0}'")]
    InvalidLanguageTag(String),
    #[error("invalid blank node label '{0}'")]
    InvalidBlankNode(String),
    #[error("literal in subject position: {0}")]
    LiteralSubject(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// What an IRI names; decides the namespace and path template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IriKind {
    /// `ms/{id}`
    Manuscript,
    /// `ms/{id}/page/{n}`
    Page,
    /// `ms/{id}/page/{n}/region/{rid}`
    Region,
    /// `agent/{label}`, a creator to be linked to external registries.
    Agent,
    /// `concept/{label}`, a subject heading to be linked.
    Concept,
    /// `jdlo:{name}`
    Class,
    /// `jdlo:{name}`
    Property,
}

/// Unreserved characters stay, everything else is percent-encoded.
const IRI_PART: &AsciiSet = &NON_ALPHANUMERIC.remove(b'-').remove(b'.').remove(b'_').remove(b'~');

fn encode(part: &str) -> String {
    utf8_percent_encode(part, IRI_PART).to_string()
}

/// Mints the IRI for an entity or vocabulary term from its id parts.
pub fn mint_iri(kind: IriKind, parts: &[&str]) -> Result<Iri, KgError> {
    let expected = match kind {
        IriKind::Manuscript | IriKind::Agent | IriKind::Concept | IriKind::Class | IriKind::Property => 1,
        IriKind::Page => 2,
        IriKind::Region => 3,
    };
    if parts.len() != expected {
        return Err(KgError::WrongPartCount { kind, expected, got: parts.len() });
    }
    if parts.iter().any(|p| p.is_empty()) {
        return Err(KgError::EmptyPart);
    }
    let p: Vec<String> = parts.iter().map(|p| encode(p)).collect();
    let iri = match kind {
        IriKind::Manuscript => format!("{}ms/{}", vocab::RESOURCE_BASE, p[0]),
        IriKind::Page => format!("{}ms/{}/page/{}", vocab::RESOURCE_BASE, p[0], p[1]),
        IriKind::Region => format!("{}ms/{}/page/{}/region/{}", vocab::RESOURCE_BASE, p[0], p[1], p[2]),
        IriKind::Agent => format!("{}agent/{}", vocab::RESOURCE_BASE, p[0]),
        IriKind::Concept => format!("{}concept/{}", vocab::RESOURCE_BASE, p[0]),
        IriKind::Class | IriKind::Property => format!("{}{}", vocab::ONTOLOGY_NS, p[0]),
    };
    Ok(Iri::new_unchecked(iri))
}

/// `jdlo:` vocabulary IRI for a known-good local name.
pub fn jdlo(name: &str) -> Iri {
    mint_iri(IriKind::Property, &[name]).expect("vocabulary names are non-empty")
}
