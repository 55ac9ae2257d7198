//! Conjunctive triple-pattern queries (basic graph patterns).
//!
//! Query text is a list of patterns separated by `.`; terms are `<IRI>`,
//! prefixed names from the fixed prefix table, `a` (for `rdf:type`),
//! quoted literals with optional `@lang` / `^^datatype`, bare integers and
//! decimals, or variables `?name`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::kg::vocab::{expand_prefix, RDF_TYPE, XSD_DECIMAL, XSD_INTEGER};
use crate::kg::{Iri, KnowledgeGraph, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("variable ?{0} does not occur in the patterns")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternTerm {
    Var(String),
    Term(Term),
}

impl PatternTerm {
    pub fn var(name: &str) -> PatternTerm {
        PatternTerm::Var(name.to_string())
    }

    fn as_var(&self) -> Option<&str> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => write!(f, "?{v}"),
            PatternTerm::Term(t) => t.fmt(f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn new(subject: PatternTerm, predicate: PatternTerm, object: PatternTerm) -> TriplePattern {
        TriplePattern { subject, predicate, object }
    }

    pub fn positions(&self) -> [&PatternTerm; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.positions().into_iter().filter_map(PatternTerm::as_var)
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// Variables in order of first appearance.
pub fn variables(patterns: &[TriplePattern]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for v in patterns.iter().flat_map(TriplePattern::variables) {
        if !out.iter().any(|o| o == v) {
            out.push(v.to_string());
        }
    }
    out
}

/// Query solutions over `variables`, duplicate-free and sorted by the
/// N-Triples forms of the bound terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BindingSet {
    pub variables: Vec<String>,
    pub solutions: Vec<Vec<Term>>,
}

impl BindingSet {
    fn from_rows(variables: Vec<String>, rows: impl IntoIterator<Item = Vec<Term>>) -> BindingSet {
        let mut keyed: BTreeMap<Vec<String>, Vec<Term>> = BTreeMap::new();
        for row in rows {
            keyed.entry(row.iter().map(Term::to_string).collect()).or_insert(row);
        }
        BindingSet { variables, solutions: keyed.into_values().collect() }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    /// Keeps only `vars` (in the given order), removing duplicate rows.
    pub fn project(&self, vars: &[String]) -> Result<BindingSet, QueryError> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| self.variables.iter().position(|x| x == v).ok_or_else(|| QueryError::UnknownVariable(v.clone())))
            .collect::<Result<_, _>>()?;
        Ok(BindingSet::from_rows(
            vars.to_vec(),
            self.solutions.iter().map(|row| idx.iter().map(|&i| row[i].clone()).collect()),
        ))
    }

    /// Header row of `?var` names, then one tab-separated row per solution.
    pub fn to_tsv(&self) -> String {
        let mut out = self.variables.iter().map(|v| format!("?{v}")).collect::<Vec<_>>().join("\t");
        out.push('\n');
        for row in &self.solutions {
            out.push_str(&row.iter().map(Term::to_string).collect::<Vec<_>>().join("\t"));
            out.push('\n');
        }
        out
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn error(&self, message: impl Into<String>) -> QueryError {
        QueryError::Syntax { position: self.pos, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &'a str {
        let rest = self.rest();
        let end = rest.find(|c: char| !f(c)).unwrap_or(rest.len());
        self.pos += end;
        &rest[..end]
    }

    fn iri(&mut self) -> Result<Iri, QueryError> {
        let start = self.pos;
        let rest = self.rest();
        let end = rest.find('>').ok_or_else(|| self.error("unterminated IRI"))?;
        let iri =
            Iri::new(&rest[1..end]).map_err(|e| QueryError::Syntax { position: start, message: e.to_string() })?;
        self.pos += end + 1;
        Ok(iri)
    }

    fn prefixed(&mut self) -> Result<Iri, QueryError> {
        let start = self.pos;
        let name = self.take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | ':' | '%' | '.'));
        // A trailing '.' separates patterns.
        let name = name.trim_end_matches('.');
        self.pos = start + name.len();
        let (prefix, local) = name.split_once(':').ok_or_else(|| QueryError::Syntax {
            position: start,
            message: format!("expected a term, found '{name}'"),
        })?;
        let ns = expand_prefix(prefix)
            .ok_or_else(|| QueryError::Syntax { position: start, message: format!("unknown prefix '{prefix}:'") })?;
        Iri::new(format!("{ns}{local}")).map_err(|e| QueryError::Syntax { position: start, message: e.to_string() })
    }

    fn literal(&mut self) -> Result<Literal, QueryError> {
        let start = self.pos;
        self.pos += 1;
        let mut lexical = String::new();
        loop {
            let Some(c) = self.peek() else {
                return Err(QueryError::Syntax { position: start, message: "unterminated literal".into() });
            };
            self.pos += c.len_utf8();
            match c {
                '"' => break,
                '\\' => {
                    let e = self.peek().ok_or_else(|| self.error("dangling escape"))?;
                    self.pos += e.len_utf8();
                    lexical.push(match e {
                        'n' => '\n',
                        'r' => '\r',
                        't' => '\t',
                        '"' => '"',
                        '\\' => '\\',
                        other => return Err(self.error(format!("unknown escape \\{other}"))),
                    });
                }
                c => lexical.push(c),
            }
        }
        if self.rest().starts_with("^^") {
            self.pos += 2;
            let dt = if self.peek() == Some('<') { self.iri()? } else { self.prefixed()? };
            Ok(Literal::typed(lexical, dt))
        } else if self.peek() == Some('@') {
            self.pos += 1;
            let tag_start = self.pos;
            let tag = self.take_while(|c| c.is_ascii_alphanumeric() || c == '-');
            Literal::lang(lexical, tag).map_err(|e| QueryError::Syntax { position: tag_start, message: e.to_string() })
        } else {
            Ok(Literal::string(lexical))
        }
    }

    fn number(&mut self) -> Result<Literal, QueryError> {
        let start = self.pos;
        let sign = if matches!(self.peek(), Some('+' | '-')) {
            self.pos += 1;
            &self.src[start..self.pos]
        } else {
            ""
        };
        let int = self.take_while(|c| c.is_ascii_digit());
        // "3." is an integer followed by a separator.
        if self.rest().starts_with('.') && self.rest()[1..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
            let frac = self.take_while(|c| c.is_ascii_digit());
            return Ok(Literal::typed(format!("{sign}{int}.{frac}"), Iri::new(XSD_DECIMAL).unwrap()));
        }
        if int.is_empty() {
            return Err(QueryError::Syntax { position: start, message: "expected digits".into() });
        }
        Ok(Literal::typed(format!("{sign}{int}"), Iri::new(XSD_INTEGER).unwrap()))
    }

    fn term(&mut self) -> Result<Option<PatternTerm>, QueryError> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek() else { return Ok(None) };
        let term = match c {
            '.' => return Ok(None),
            '?' => {
                self.pos += 1;
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                if name.is_empty() || name.starts_with(|c: char| c.is_ascii_digit()) {
                    return Err(QueryError::Syntax { position: start, message: "invalid variable name".into() });
                }
                PatternTerm::Var(name.to_string())
            }
            '<' => PatternTerm::Term(Term::Iri(self.iri()?)),
            '"' => PatternTerm::Term(Term::Literal(self.literal()?)),
            '+' | '-' | '0'..='9' => PatternTerm::Term(Term::Literal(self.number()?)),
            'a' if self.rest()[1..].starts_with(char::is_whitespace) => {
                self.pos += 1;
                PatternTerm::Term(Term::Iri(Iri::new(RDF_TYPE).unwrap()))
            }
            _ => PatternTerm::Term(Term::Iri(self.prefixed()?)),
        };
        Ok(Some(term))
    }
}

/// Parses query text into patterns.
pub fn parse_query(text: &str) -> Result<Vec<TriplePattern>, QueryError> {
    let mut lx = Lexer { src: text, pos: 0 };
    let mut patterns = Vec::new();
    loop {
        lx.skip_ws();
        if lx.peek().is_none() {
            break;
        }
        let start = lx.pos;
        let mut terms = Vec::with_capacity(3);
        while terms.len() < 3 {
            match lx.term()? {
                Some(t) => terms.push(t),
                None => {
                    return Err(QueryError::Syntax {
                        position: lx.pos,
                        message: format!("pattern starting at {start} needs 3 terms, found {}", terms.len()),
                    })
                }
            }
        }
        let object = terms.pop().unwrap();
        let predicate = terms.pop().unwrap();
        let subject = terms.pop().unwrap();
        patterns.push(TriplePattern::new(subject, predicate, object));
        lx.skip_ws();
        match lx.peek() {
            None => break,
            Some('.') => lx.pos += 1,
            Some(_) => return Err(lx.error("expected '.' between patterns")),
        }
    }
    if patterns.is_empty() {
        return Err(QueryError::Syntax { position: 0, message: "empty query".into() });
    }
    Ok(patterns)
}

type Bindings<'g> = BTreeMap<&'g str, Term>;

fn resolve<'a>(t: &'a PatternTerm, bindings: &'a Bindings) -> Option<&'a Term> {
    match t {
        PatternTerm::Term(term) => Some(term),
        PatternTerm::Var(v) => bindings.get(v.as_str()),
    }
}

/// Evaluates a basic graph pattern.
///
/// Nested-loop join over the graph's indexes: at every step the remaining
/// pattern with the fewest matching triples under the current bindings is
/// joined next.
pub fn evaluate(patterns: &[TriplePattern], graph: &KnowledgeGraph) -> BindingSet {
    let vars = variables(patterns);
    let mut rows = Vec::new();
    let mut remaining: Vec<&TriplePattern> = patterns.iter().collect();
    join(graph, &mut remaining, &mut BTreeMap::new(), &mut |b: &Bindings| {
        rows.push(vars.iter().map(|v| b[v.as_str()].clone()).collect::<Vec<_>>());
    });
    BindingSet::from_rows(vars, rows)
}

fn join<'p>(
    graph: &KnowledgeGraph,
    remaining: &mut Vec<&'p TriplePattern>,
    bindings: &mut Bindings<'p>,
    emit: &mut dyn FnMut(&Bindings),
) {
    if remaining.is_empty() {
        emit(bindings);
        return;
    }
    let (best, _) = remaining
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let [s, pr, o] = p.positions().map(|t| resolve(t, bindings));
            (i, graph.count_matching(s, pr, o))
        })
        .min_by_key(|(i, n)| (*n, *i))
        .expect("non-empty");
    let pattern = remaining.remove(best);
    let [s, p, o] = pattern.positions().map(|t| resolve(t, bindings).cloned());
    let matches: Vec<[Term; 3]> =
        graph.matching(s.as_ref(), p.as_ref(), o.as_ref()).map(|[a, b, c]| [a.clone(), b.clone(), c.clone()]).collect();

    for triple in matches {
        let mut added: Vec<&'p str> = Vec::new();
        let mut consistent = true;
        for (pos, value) in pattern.positions().into_iter().zip(triple) {
            let PatternTerm::Var(v) = pos else { continue };
            match bindings.get(v.as_str()) {
                Some(bound) if *bound != value => {
                    consistent = false;
                    break;
                }
                Some(_) => {}
                None => {
                    bindings.insert(v.as_str(), value);
                    added.push(v.as_str());
                }
            }
        }
        if consistent {
            join(graph, remaining, bindings, emit);
        }
        for v in added {
            bindings.remove(v);
        }
    }
    remaining.insert(best, pattern);
}

/// Distinct values bound to `var` over all solutions.
pub fn distinct_values(set: &BindingSet, var: &str) -> BTreeSet<Term> {
    match set.variables.iter().position(|v| v == var) {
        Some(i) => set.solutions.iter().map(|row| row[i].clone()).collect(),
        None => BTreeSet::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{jdlo, Triple};

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://ex/{s}")).unwrap()
    }

    #[test]
    fn single_pattern() {
        let ps = parse_query("?r rdf:type jdlo:Stamp").unwrap();
        assert_eq!(ps.len(), 1);
        assert_eq!(ps[0].subject, PatternTerm::var("r"));
        assert_eq!(ps[0].object, PatternTerm::Term(Term::Iri(jdlo("Stamp"))));
    }

    #[test]
    fn shared_variable() {
        let ps = parse_query("?m jdlo:hasPage ?p . ?p jdlo:hasRegion ?r").unwrap();
        assert_eq!(ps.len(), 2);
        assert_eq!(ps[0].object, ps[1].subject);
        assert_eq!(variables(&ps), vec!["m", "p", "r"]);
    }

    #[test]
    fn too_few_terms() {
        assert!(matches!(parse_query("?r rdf:type"), Err(QueryError::Syntax { .. })));
        assert!(matches!(parse_query("?r rdf:type . ?x ?y ?z"), Err(QueryError::Syntax { .. })));
        assert!(matches!(parse_query(""), Err(QueryError::Syntax { position: 0, .. })));
        assert!(matches!(parse_query("?r foo:bar ?x"), Err(QueryError::Syntax { position: 3, .. })));
        assert!(matches!(parse_query("?r ?p ?o ?x"), Err(QueryError::Syntax { .. })));
        assert!(matches!(parse_query("?1 ?p ?o"), Err(QueryError::Syntax { .. })));
    }

    #[test]
    fn literals_and_numbers() {
        let ps =
            parse_query("?p jdlo:pageNumber 3. ?m dcterms:title \"Psalterium \\\"x\\\"\"@la . ?r jdlo:x 0.100000 .")
                .unwrap();
        assert_eq!(ps.len(), 3);
        assert_eq!(ps[0].object.to_string(), "\"3\"^^<http://www.w3.org/2001/XMLSchema#integer>");
        assert_eq!(ps[1].object.to_string(), "\"Psalterium \\\"x\\\"\"@la");
        assert_eq!(ps[2].object.to_string(), "\"0.100000\"^^<http://www.w3.org/2001/XMLSchema#decimal>");
        let ps = parse_query("?s a <http://ex/T> . ?s ?p \"x\"^^xsd:string").unwrap();
        assert_eq!(ps[0].predicate.to_string(), format!("<{RDF_TYPE}>"));
        assert_eq!(
            ps[1].object,
            PatternTerm::Term(Term::Literal(Literal::typed("x", Iri::new(crate::kg::vocab::XSD_STRING).unwrap())))
        );
    }

    #[test]
    fn full_scan() {
        let g: KnowledgeGraph =
            (0..3).map(|i| Triple::new(iri(&format!("s{i}")), iri("p"), iri("o")).unwrap()).collect();
        let r = evaluate(&parse_query("?s ?p ?o").unwrap(), &g);
        assert_eq!(r.len(), 3);
        assert_eq!(r.variables, vec!["s", "p", "o"]);
    }

    #[test]
    fn repeated_variable_in_one_pattern() {
        let g: KnowledgeGraph =
            [Triple::new(iri("a"), iri("p"), iri("a")).unwrap(), Triple::new(iri("a"), iri("p"), iri("b")).unwrap()]
                .into_iter()
                .collect();
        let r = evaluate(&parse_query("?x <http://ex/p> ?x").unwrap(), &g);
        assert_eq!(r.solutions, vec![vec![Term::Iri(iri("a"))]]);
    }

    #[test]
    fn projection_and_tsv() {
        let g: KnowledgeGraph = [
            Triple::new(iri("m"), iri("hasPage"), iri("p1")).unwrap(),
            Triple::new(iri("m"), iri("hasPage"), iri("p2")).unwrap(),
        ]
        .into_iter()
        .collect();
        let r = evaluate(&parse_query("?m <http://ex/hasPage> ?p").unwrap(), &g);
        let only_m = r.project(&["m".to_string()]).unwrap();
        assert_eq!(only_m.len(), 1);
        assert_eq!(only_m.to_tsv(), "?m\n<http://ex/m>\n");
        assert!(r.project(&["zz".to_string()]).is_err());
    }
}
