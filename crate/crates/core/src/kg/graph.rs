use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::RangeInclusive;

use super::term::{Iri, Term, Triple};

type Key = [u32; 3];

fn prefix_range(a: Option<u32>, b: Option<u32>) -> RangeInclusive<Key> {
    match (a, b) {
        (Some(a), Some(b)) => [a, b, 0]..=[a, b, u32::MAX],
        (Some(a), None) => [a, 0, 0]..=[a, u32::MAX, u32::MAX],
        _ => [0, 0, 0]..=[u32::MAX, u32::MAX, u32::MAX],
    }
}

/// Set of triples with subject-, predicate- and object-leading indexes.
///
/// Terms are interned; each triple is stored once per index as
/// `[s, p, o]`, `[p, o, s]` and `[o, s, p]`, so any combination of bound
/// positions is answered with one range scan.
#[derive(Clone, Default)]
pub struct KnowledgeGraph {
    terms: Vec<Term>,
    ids: HashMap<Term, u32>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

impl KnowledgeGraph {
    pub fn new() -> KnowledgeGraph {
        KnowledgeGraph::default()
    }

    fn intern(&mut self, term: &Term) -> u32 {
        if let Some(id) = self.ids.get(term) {
            return *id;
        }
        let id = u32::try_from(self.terms.len()).expect("term dictionary overflow");
        self.terms.push(term.clone());
        self.ids.insert(term.clone(), id);
        id
    }

    fn lookup(&self, term: &Term) -> Option<u32> {
        self.ids.get(term).copied()
    }

    /// Adds a triple; returns `false` if it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        let s = self.intern(triple.subject());
        let p = self.intern(&Term::Iri(triple.predicate().clone()));
        let o = self.intern(triple.object());
        if !self.spo.insert([s, p, o]) {
            return false;
        }
        self.pos.insert([p, o, s]);
        self.osp.insert([o, s, p]);
        true
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        let p = Term::Iri(triple.predicate().clone());
        match (self.lookup(triple.subject()), self.lookup(&p), self.lookup(triple.object())) {
            (Some(s), Some(p), Some(o)) => self.spo.contains(&[s, p, o]),
            _ => false,
        }
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    fn to_triple(&self, [s, p, o]: Key) -> Triple {
        let predicate = match &self.terms[p as usize] {
            Term::Iri(i) => i.clone(),
            other => unreachable!("non-IRI predicate {other}"),
        };
        Triple::new(self.terms[s as usize].clone(), predicate, self.terms[o as usize].clone())
            .expect("stored triples are valid")
    }

    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().map(|k| self.to_triple(*k))
    }

    /// Triples sorted by their N-Triples lines.
    pub fn sorted_triples(&self) -> Vec<Triple> {
        let mut v: Vec<(String, Triple)> = self.iter().map(|t| (t.to_string(), t)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v.into_iter().map(|(_, t)| t).collect()
    }

    /// Triples matching a pattern, `None` being a wildcard. Yields
    /// `[subject, predicate, object]`.
    pub fn matching<'a>(
        &'a self,
        s: Option<&Term>,
        p: Option<&Term>,
        o: Option<&Term>,
    ) -> Box<dyn Iterator<Item = [&'a Term; 3]> + 'a> {
        let resolve = |t: Option<&Term>| match t {
            None => Ok(None),
            Some(t) => self.lookup(t).map(Some).ok_or(()),
        };
        let (Ok(s), Ok(p), Ok(o)) = (resolve(s), resolve(p), resolve(o)) else {
            return Box::new(std::iter::empty());
        };
        let keys: Box<dyn Iterator<Item = Key> + 'a> = match (s, p, o) {
            (Some(s), Some(p), Some(o)) => Box::new(self.spo.get(&[s, p, o]).copied().into_iter()),
            (Some(_), _, None) => Box::new(self.spo.range(prefix_range(s, p)).copied()),
            (None, Some(_), _) => Box::new(self.pos.range(prefix_range(p, o)).map(|&[p, o, s]| [s, p, o])),
            (_, None, Some(_)) => Box::new(self.osp.range(prefix_range(o, s)).map(|&[o, s, p]| [s, p, o])),
            (None, None, None) => Box::new(self.spo.iter().copied()),
        };
        Box::new(keys.map(move |[s, p, o]| [&self.terms[s as usize], &self.terms[p as usize], &self.terms[o as usize]]))
    }

    pub fn count_matching(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> usize {
        self.matching(s, p, o).count()
    }

    /// Objects of `subject --predicate-->`.
    pub fn objects<'a>(&'a self, subject: &Term, predicate: &Iri) -> Vec<&'a Term> {
        self.matching(Some(subject), Some(&Term::Iri(predicate.clone())), None).map(|[_, _, o]| o).collect()
    }

    pub fn merge(&mut self, other: &KnowledgeGraph) {
        for t in other.iter() {
            self.insert(t);
        }
    }

    /// Consistency check between the main set and both secondary indexes.
    pub fn indexes_consistent(&self) -> bool {
        self.pos.len() == self.spo.len()
            && self.osp.len() == self.spo.len()
            && self.spo.iter().all(|&[s, p, o]| self.pos.contains(&[p, o, s]) && self.osp.contains(&[o, s, p]))
    }
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().all(|t| other.contains(&t))
    }
}

impl Eq for KnowledgeGraph {}

impl fmt::Debug for KnowledgeGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sorted_triples().iter().map(|t| t.to_string())).finish()
    }
}

impl FromIterator<Triple> for KnowledgeGraph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        let mut g = KnowledgeGraph::new();
        for t in iter {
            g.insert(t);
        }
        g
    }
}

impl Extend<Triple> for KnowledgeGraph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}
