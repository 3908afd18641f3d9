use std::collections::{BTreeMap, HashMap};

use indexmap::IndexSet;

use super::term::{Term, Triple};
use crate::error::RdfError;
use crate::vocab::rdf;

/// A set of triples with a namespace prefix table.
///
/// Triples keep their insertion order, which for parsed graphs is document
/// order. Lookups through [`Graph::matching`] are returned sorted.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    triples: IndexSet<Triple>,
    by_subject: HashMap<Term, Vec<usize>>,
    prefixes: BTreeMap<String, String>,
    next_blank: u64,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut graph = Self::new();
        graph.extend(triples);
        graph
    }

    /// Inserts a triple; returns false if it was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        if self.triples.contains(&triple) {
            return false;
        }
        let subject = triple.subject.clone();
        let (idx, _) = self.triples.insert_full(triple);
        self.by_subject.entry(subject).or_default().push(idx);
        true
    }

    pub fn add(&mut self, subject: Term, predicate: &str, object: Term) -> bool {
        self.insert(Triple::new(subject, Term::iri(predicate), object))
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    /// Triples in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Position of a triple in insertion order.
    pub fn position(&self, triple: &Triple) -> Option<usize> {
        self.triples.get_index_of(triple)
    }

    /// All triples matching the given components, sorted.
    pub fn matching(&self, s: Option<&Term>, p: Option<&Term>, o: Option<&Term>) -> Vec<&Triple> {
        let filter = |t: &&Triple| {
            p.is_none_or(|p| &t.predicate == p) && o.is_none_or(|o| &t.object == o)
        };
        let mut out: Vec<&Triple> = match s {
            Some(s) => self
                .by_subject
                .get(s)
                .into_iter()
                .flatten()
                .map(|&i| &self.triples[i])
                .filter(filter)
                .collect(),
            None => self.triples.iter().filter(filter).collect(),
        };
        out.sort();
        out
    }

    /// Triples with the given subject, in insertion order.
    pub fn triples_of<'a>(&'a self, subject: &Term) -> impl Iterator<Item = &'a Triple> + 'a {
        self.by_subject
            .get(subject)
            .into_iter()
            .flatten()
            .map(move |&i| &self.triples[i])
    }

    /// Objects of `(subject, predicate, ?)` in insertion order.
    pub fn objects<'a>(&'a self, subject: &Term, predicate: &'a str) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples_of(subject)
            .filter(move |t| t.predicate.as_iri() == Some(predicate))
            .map(|t| &t.object)
    }

    pub fn object(&self, subject: &Term, predicate: &str) -> Option<&Term> {
        self.triples_of(subject)
            .find(|t| t.predicate.as_iri() == Some(predicate))
            .map(|t| &t.object)
    }

    pub fn has_subject(&self, subject: &Term) -> bool {
        self.by_subject.contains_key(subject)
    }

    pub fn subjects(&self) -> impl Iterator<Item = &Term> {
        self.by_subject.keys()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Registers a prefix. Empty namespaces are ignored.
    pub fn set_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        let namespace = namespace.into();
        if !namespace.is_empty() {
            self.prefixes.insert(prefix.into(), namespace);
        }
    }

    /// Mints a blank node that is unused in this graph.
    pub fn fresh_blank(&mut self) -> Term {
        loop {
            let candidate = Term::blank(format!("b{}", self.next_blank));
            self.next_blank += 1;
            if !self.by_subject.contains_key(&candidate) {
                return candidate;
            }
        }
    }

    /// Writes an `rdf:first`/`rdf:rest` chain and returns its head.
    pub fn write_list(&mut self, items: &[Term]) -> Term {
        let mut head = Term::iri(rdf::NIL);
        for item in items.iter().rev() {
            let node = self.fresh_blank();
            self.add(node.clone(), rdf::FIRST, item.clone());
            self.add(node.clone(), rdf::REST, head);
            head = node;
        }
        head
    }

    /// Reads the collection starting at `head`.
    pub fn read_list(&self, head: &Term) -> Result<Vec<Term>, RdfError> {
        let nil = Term::iri(rdf::NIL);
        let mut items = Vec::new();
        let mut node = head.clone();
        let mut seen = std::collections::HashSet::new();
        while node != nil {
            if !seen.insert(node.clone()) {
                return Err(RdfError::MalformedList {
                    node: node.to_string(),
                    reason: "cycle in rdf:rest chain".into(),
                });
            }
            let first = self.object(&node, rdf::FIRST).ok_or_else(|| RdfError::MalformedList {
                node: node.to_string(),
                reason: "missing rdf:first".into(),
            })?;
            let rest = self.object(&node, rdf::REST).ok_or_else(|| RdfError::MalformedList {
                node: node.to_string(),
                reason: "missing rdf:rest".into(),
            })?;
            items.push(first.clone());
            node = rest.clone();
        }
        Ok(items)
    }

    /// True when `term` is `rdf:nil` or a node carrying `rdf:first`.
    pub fn is_list_head(&self, term: &Term) -> bool {
        match term {
            Term::Iri(iri) => iri == rdf::NIL,
            Term::Blank(_) => self.object(term, rdf::FIRST).is_some(),
            Term::Literal(_) => false,
        }
    }
}

impl Extend<Triple> for Graph {
    fn extend<I: IntoIterator<Item = Triple>>(&mut self, iter: I) {
        for t in iter {
            self.insert(t);
        }
    }
}

impl PartialEq for Graph {
    /// Set equality over triples; prefixes are not compared.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.triples.iter().all(|t| other.contains(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Literal;

    fn ex(local: &str) -> Term {
        Term::iri(format!("http://example.com/{local}"))
    }

    #[test]
    fn insert_is_set_semantics() {
        let mut g = Graph::new();
        assert!(g.add(ex("a"), "http://example.com/p", ex("b")));
        assert!(!g.add(ex("a"), "http://example.com/p", ex("b")));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn matching_on_empty_graph() {
        let g = Graph::new();
        assert!(g.matching(None, None, None).is_empty());
    }

    #[test]
    fn matching_everything_equals_full_scan() {
        let mut g = Graph::new();
        for i in 0..20 {
            g.add(ex(&format!("s{}", i % 4)), "http://example.com/p", Term::literal(Literal::integer(i)));
        }
        let all = g.matching(None, None, None);
        assert_eq!(all.len(), g.iter().count());
        let s1 = ex("s1");
        let some = g.matching(Some(&s1), None, None);
        assert_eq!(some.len(), g.iter().filter(|t| t.subject == s1).count());
        assert!(some.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn list_round_trip_and_nil() {
        let mut g = Graph::new();
        let items: Vec<Term> = (0..5).map(|i| Term::string(format!("v{i}"))).collect();
        let head = g.write_list(&items);
        assert_eq!(g.read_list(&head).unwrap(), items);
        assert!(g.read_list(&Term::iri(rdf::NIL)).unwrap().is_empty());
    }

    #[test]
    fn hand_built_chain() {
        // _:n0 .. _:n4, built without write_list
        let mut g = Graph::new();
        for i in 0..5 {
            let node = Term::blank(format!("n{i}"));
            g.add(node.clone(), rdf::FIRST, Term::string(format!("item{i}")));
            let rest = if i == 4 { Term::iri(rdf::NIL) } else { Term::blank(format!("n{}", i + 1)) };
            g.add(node, rdf::REST, rest);
        }
        let got = g.read_list(&Term::blank("n0")).unwrap();
        let want: Vec<Term> = (0..5).map(|i| Term::string(format!("item{i}"))).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn malformed_list() {
        let mut g = Graph::new();
        g.add(Term::blank("x"), rdf::FIRST, Term::string("a"));
        assert!(matches!(g.read_list(&Term::blank("x")), Err(RdfError::MalformedList { .. })));
    }
}
