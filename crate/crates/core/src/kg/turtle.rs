use std::collections::BTreeMap;

use super::term::escape_lexical;
use super::vocab::{PREFIXES, RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_INTEGER, XSD_STRING};
use super::{Iri, KnowledgeGraph, Literal, Term};

/// Objects keyed by predicate, each with its sort key.
type PredicateObjects = BTreeMap<String, Vec<(String, Term)>>;

fn is_simple_local(local: &str) -> bool {
    let mut chars = local.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn iri(iri: &Iri) -> String {
    for (prefix, ns) in PREFIXES {
        if let Some(local) = iri.as_str().strip_prefix(ns) {
            if is_simple_local(local) {
                return format!("{prefix}:{local}");
            }
        }
    }
    iri.to_string()
}

fn literal(lit: &Literal) -> String {
    let lex = lit.lexical();
    let dt = lit.datatype().as_str();
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let unsigned = lex.strip_prefix(['+', '-']).unwrap_or(lex);
    if lit.language().is_none() {
        if dt == XSD_INTEGER && digits(unsigned) {
            return lex.to_string();
        }
        if dt == XSD_DECIMAL {
            if let Some((int, frac)) = unsigned.split_once('.') {
                if (int.is_empty() || digits(int)) && digits(frac) {
                    return lex.to_string();
                }
            }
        }
        if dt == XSD_BOOLEAN && (lex == "true" || lex == "false") {
            return lex.to_string();
        }
    }
    let mut out = String::from("\"");
    escape_lexical(lex, &mut out);
    out.push('"');
    match lit.language() {
        Some(lang) => {
            out.push('@');
            out.push_str(lang);
        }
        None if dt == XSD_STRING => {}
        None => {
            out.push_str("^^");
            out.push_str(&iri(lit.datatype()));
        }
    }
    out
}

fn term(t: &Term) -> String {
    match t {
        Term::Iri(i) => iri(i),
        Term::BlankNode(b) => format!("_:{b}"),
        Term::Literal(l) => literal(l),
    }
}

/// Turtle with the fixed prefix block, one block per subject (sorted by
/// N-Triples form), predicates sorted by IRI and contracted with `;`,
/// objects sorted and contracted with `,`.
pub fn serialize_turtle(graph: &KnowledgeGraph) -> String {
    let mut out = String::new();
    for (prefix, ns) in PREFIXES {
        out.push_str(&format!("@prefix {prefix}: <{ns}> .\n"));
    }

    let mut subjects: BTreeMap<String, (Term, PredicateObjects)> = BTreeMap::new();
    for t in graph.iter() {
        let entry = subjects.entry(t.subject().to_string()).or_insert_with(|| (t.subject().clone(), BTreeMap::new()));
        entry
            .1
            .entry(t.predicate().as_str().to_string())
            .or_default()
            .push((t.object().to_string(), t.object().clone()));
    }

    for (subject, predicates) in subjects.values() {
        out.push('\n');
        out.push_str(&term(subject));
        let count = predicates.len();
        for (i, (predicate, objects)) in predicates.iter().enumerate() {
            let mut objects = objects.clone();
            objects.sort_by(|a, b| a.0.cmp(&b.0));
            out.push_str(if i == 0 { " " } else { "    " });
            if predicate == RDF_TYPE {
                out.push('a');
            } else {
                out.push_str(&iri(&Iri::new_unchecked(predicate.clone())));
            }
            out.push(' ');
            let rendered: Vec<String> = objects.iter().map(|(_, o)| term(o)).collect();
            out.push_str(&rendered.join(", "));
            out.push_str(if i + 1 == count { " .\n" } else { " ;\n" });
        }
    }
    out
}
