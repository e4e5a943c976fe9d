//! In-memory RDF graphs: terms, triples, Turtle and N-Triples I/O, and
//! single triple-pattern matching.

mod iso;
mod ntriples;
mod serialize;
mod turtle;

pub use iso::is_isomorphic;
pub use ntriples::parse_ntriples;
pub use serialize::{serialize, write_ntriples_term, RdfFormat};
pub use turtle::{parse_turtle, parse_turtle_with_base};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Well-known vocabulary IRIs.
pub mod vocab {
    pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
    pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
    pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

    pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const RDF_PROPERTY: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#Property";
    pub const RDF_FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
    pub const RDF_REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
    pub const RDF_NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
    pub const RDF_LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";

    pub const RDFS_CLASS: &str = "http://www.w3.org/2000/01/rdf-schema#Class";
    pub const RDFS_DOMAIN: &str = "http://www.w3.org/2000/01/rdf-schema#domain";
    pub const RDFS_RANGE: &str = "http://www.w3.org/2000/01/rdf-schema#range";
    pub const RDFS_SUBCLASS_OF: &str = "http://www.w3.org/2000/01/rdf-schema#subClassOf";

    pub const OWL_CLASS: &str = "http://www.w3.org/2002/07/owl#Class";
    pub const OWL_OBJECT_PROPERTY: &str = "http://www.w3.org/2002/07/owl#ObjectProperty";
    pub const OWL_DATATYPE_PROPERTY: &str = "http://www.w3.org/2002/07/owl#DatatypeProperty";
    pub const OWL_ANNOTATION_PROPERTY: &str = "http://www.w3.org/2002/07/owl#AnnotationProperty";
    pub const OWL_UNION_OF: &str = "http://www.w3.org/2002/07/owl#unionOf";

    pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unresolved prefix '{prefix}:' at line {line}, column {column}")]
    UnresolvedPrefix {
        prefix: String,
        line: usize,
        column: usize,
    },
}

impl RdfError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        RdfError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TermKind {
    Iri,
    Literal,
    BlankNode,
}

impl TermKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TermKind::Iri => "iri",
            TermKind::Literal => "literal",
            TermKind::BlankNode => "blank",
        }
    }
}

/// A literal value. At most one of `datatype` and `language` is set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub lexical: String,
    pub datatype: Option<String>,
    pub language: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: Some(datatype.into()),
            language: None,
        }
    }

    pub fn lang(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: None,
            language: Some(language.into()),
        }
    }

    /// The datatype IRI, including the implicit `rdf:langString` for
    /// language-tagged literals.
    pub fn effective_datatype(&self) -> Option<&str> {
        match (&self.datatype, &self.language) {
            (Some(dt), _) => Some(dt),
            (None, Some(_)) => Some(vocab::RDF_LANG_STRING),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(value: impl Into<String>) -> Self {
        Term::Iri(value.into())
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::BlankNode(label.into())
    }

    pub fn kind(&self) -> TermKind {
        match self {
            Term::Iri(_) => TermKind::Iri,
            Term::BlankNode(_) => TermKind::BlankNode,
            Term::Literal(_) => TermKind::Literal,
        }
    }

    /// IRI text, blank-node label, or literal lexical form.
    pub fn value(&self) -> &str {
        match self {
            Term::Iri(v) | Term::BlankNode(v) => v,
            Term::Literal(l) => &l.lexical,
        }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut buf = String::new();
        write_ntriples_term(&mut buf, self);
        f.write_str(&buf)
    }
}

// Terms order by their N-Triples text. The first characters are '"' for
// literals, '<' for IRIs and '_' for blank nodes, so kinds sort in that order
// and same-kind IRIs/blank nodes compare by their raw value.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(t: &Term) -> u8 {
            match t {
                Term::Literal(_) => 0,
                Term::Iri(_) => 1,
                Term::BlankNode(_) => 2,
            }
        }
        match (self, other) {
            (Term::Iri(a), Term::Iri(b)) => iri_text_cmp(a, b),
            (Term::BlankNode(a), Term::BlankNode(b)) => a.cmp(b),
            (Term::Literal(_), Term::Literal(_)) => self.to_string().cmp(&other.to_string()),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// `<a>` vs `<ab>` compares '>' against 'b'; mirror that so the order matches
// the serialized text exactly.
fn iri_text_cmp(a: &str, b: &str) -> Ordering {
    let a = a.as_bytes().iter().chain(std::iter::once(&b'>'));
    let b = b.as_bytes().iter().chain(std::iter::once(&b'>'));
    a.cmp(b)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    /// Builds a triple, rejecting literal subjects and non-IRI predicates.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Option<Self> {
        if matches!(subject, Term::Literal(_)) || !matches!(predicate, Term::Iri(_)) {
            return None;
        }
        Some(Triple {
            subject,
            predicate,
            object,
        })
    }

    pub fn iris(s: &str, p: &str, o: &str) -> Self {
        Triple {
            subject: Term::iri(s),
            predicate: Term::iri(p),
            object: Term::iri(o),
        }
    }
}

/// A set of triples plus the namespace prefixes seen while parsing.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    pub fn add_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Triples in serialization order.
    pub fn triples(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn triple_set(&self) -> &BTreeSet<Triple> {
        &self.triples
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    /// Expands `prefix:local` using the graph's prefixes.
    pub fn expand_curie(&self, curie: &str) -> Option<String> {
        let (prefix, local) = curie.split_once(':')?;
        self.prefixes.get(prefix).map(|ns| format!("{ns}{local}"))
    }

    /// All triples whose components equal every bound argument, in
    /// serialization order.
    pub fn match_pattern(
        &self,
        subject: Option<&Term>,
        predicate: Option<&Term>,
        object: Option<&Term>,
    ) -> Vec<Triple> {
        self.triples
            .iter()
            .filter(|t| subject.is_none_or(|s| &t.subject == s))
            .filter(|t| predicate.is_none_or(|p| &t.predicate == p))
            .filter(|t| object.is_none_or(|o| &t.object == o))
            .cloned()
            .collect()
    }

    /// Objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(
        &'a self,
        subject: &'a Term,
        predicate: &'a str,
    ) -> impl Iterator<Item = &'a Term> + 'a {
        self.triples
            .iter()
            .filter(move |t| &t.subject == subject && t.predicate.as_iri() == Some(predicate))
            .map(|t| &t.object)
    }

    /// Members of the RDF collection starting at `head`, or `None` if the
    /// list is malformed or cyclic.
    pub fn collection(&self, head: &Term) -> Option<Vec<Term>> {
        let mut members = Vec::new();
        let mut node = head.clone();
        let mut seen = BTreeSet::new();
        loop {
            if node.as_iri() == Some(vocab::RDF_NIL) {
                return Some(members);
            }
            if !seen.insert(node.clone()) {
                return None;
            }
            let first = self.objects(&node, vocab::RDF_FIRST).next()?.clone();
            let rest = self.objects(&node, vocab::RDF_REST).next()?.clone();
            members.push(first);
            node = rest;
        }
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
            prefixes: BTreeMap::new(),
        }
    }
}

/// Assigns `_:b0`, `_:b1`, ... to blank-node labels in order of first
/// appearance.
#[derive(Debug, Default)]
pub(crate) struct BlankNodeNamer {
    labels: std::collections::HashMap<String, String>,
    next: usize,
}

impl BlankNodeNamer {
    pub(crate) fn named(&mut self, label: &str) -> Term {
        if let Some(existing) = self.labels.get(label) {
            return Term::BlankNode(existing.clone());
        }
        let fresh = format!("b{}", self.next);
        self.next += 1;
        self.labels.insert(label.to_string(), fresh.clone());
        Term::BlankNode(fresh)
    }

    pub(crate) fn fresh(&mut self) -> Term {
        let fresh = format!("b{}", self.next);
        self.next += 1;
        Term::BlankNode(fresh)
    }
}
