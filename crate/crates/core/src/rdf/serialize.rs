use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{vocab, Graph, Literal, Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    Turtle,
    NTriples,
}

/// Serializes a graph. Statements come out in the graph's sorted order, so
/// the output is deterministic.
pub fn serialize(graph: &Graph, format: RdfFormat) -> String {
    match format {
        RdfFormat::NTriples => to_ntriples(graph),
        RdfFormat::Turtle => to_turtle(graph),
    }
}

fn to_ntriples(graph: &Graph) -> String {
    let mut out = String::new();
    for t in graph.triples() {
        write_ntriples_triple(&mut out, t);
        out.push('\n');
    }
    out
}

fn write_ntriples_triple(out: &mut String, t: &Triple) {
    write_ntriples_term(out, &t.subject);
    out.push(' ');
    write_ntriples_term(out, &t.predicate);
    out.push(' ');
    write_ntriples_term(out, &t.object);
    out.push_str(" .");
}

/// Appends the N-Triples form of a term.
pub fn write_ntriples_term(out: &mut String, term: &Term) {
    match term {
        Term::Iri(iri) => write_iri(out, iri),
        Term::BlankNode(label) => {
            out.push_str("_:");
            out.push_str(label);
        }
        Term::Literal(lit) => {
            write_quoted(out, &lit.lexical);
            write_literal_suffix(out, lit, write_iri);
        }
    }
}

fn write_iri(out: &mut String, iri: &str) {
    out.push('<');
    for c in iri.chars() {
        if c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            let _ = write!(out, "\\u{:04X}", c as u32);
        } else {
            out.push(c);
        }
    }
    out.push('>');
}

fn write_quoted(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{8}' => out.push_str("\\b"),
            '\u{c}' => out.push_str("\\f"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn write_literal_suffix(out: &mut String, lit: &Literal, write_dt: impl Fn(&mut String, &str)) {
    if let Some(lang) = &lit.language {
        out.push('@');
        out.push_str(lang);
    } else if let Some(dt) = &lit.datatype {
        out.push_str("^^");
        write_dt(out, dt);
    }
}

struct TurtleWriter<'a> {
    // (prefix, namespace), longest namespace first
    prefixes: Vec<(&'a str, &'a str)>,
}

impl<'a> TurtleWriter<'a> {
    fn new(graph: &'a Graph) -> Self {
        let mut prefixes: Vec<(&str, &str)> = graph
            .prefixes()
            .iter()
            .filter(|(p, _)| valid_prefix_label(p))
            .map(|(p, ns)| (p.as_str(), ns.as_str()))
            .collect();
        prefixes.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
        TurtleWriter { prefixes }
    }

    fn iri(&self, out: &mut String, iri: &str) {
        for (prefix, ns) in &self.prefixes {
            if let Some(local) = iri.strip_prefix(ns) {
                if safe_local_name(local) {
                    out.push_str(prefix);
                    out.push(':');
                    out.push_str(local);
                    return;
                }
            }
        }
        write_iri(out, iri);
    }

    fn term(&self, out: &mut String, term: &Term) {
        match term {
            Term::Iri(iri) => self.iri(out, iri),
            Term::BlankNode(_) => write_ntriples_term(out, term),
            Term::Literal(lit) => {
                write_quoted(out, &lit.lexical);
                write_literal_suffix(out, lit, |out, dt| self.iri(out, dt));
            }
        }
    }
}

fn valid_prefix_label(p: &str) -> bool {
    if p.is_empty() {
        return true;
    }
    p.starts_with(|c: char| c.is_ascii_alphabetic())
        && !p.ends_with('.')
        && p.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn safe_local_name(local: &str) -> bool {
    local.is_empty()
        || (local.starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_')
            && local.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-'))
}

fn to_turtle(graph: &Graph) -> String {
    let writer = TurtleWriter::new(graph);
    let mut out = String::new();
    for (prefix, ns) in graph.prefixes() {
        if valid_prefix_label(prefix) {
            out.push_str("@prefix ");
            out.push_str(prefix);
            out.push_str(": ");
            write_iri(&mut out, ns);
            out.push_str(" .\n");
        }
    }
    let mut current_subject: Option<&Term> = None;
    let mut current_predicate: Option<&Term> = None;
    for t in graph.triples() {
        if current_subject != Some(&t.subject) {
            if current_subject.is_some() {
                out.push_str(" .\n");
            }
            out.push('\n');
            writer.term(&mut out, &t.subject);
            out.push(' ');
            current_subject = Some(&t.subject);
            current_predicate = None;
        }
        if current_predicate == Some(&t.predicate) {
            out.push_str(", ");
        } else {
            if current_predicate.is_some() {
                out.push_str(" ;\n    ");
            }
            if t.predicate.as_iri() == Some(vocab::RDF_TYPE) {
                out.push('a');
            } else {
                writer.term(&mut out, &t.predicate);
            }
            out.push(' ');
            current_predicate = Some(&t.predicate);
        }
        writer.term(&mut out, &t.object);
    }
    if current_subject.is_some() {
        out.push_str(" .\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{is_isomorphic, parse_ntriples, parse_turtle};

    #[test]
    fn empty_graph() {
        assert_eq!(serialize(&Graph::new(), RdfFormat::NTriples), "");
        assert_eq!(serialize(&Graph::new(), RdfFormat::Turtle), "");
        let mut g = Graph::new();
        g.add_prefix("ex", "http://ex.org/");
        assert_eq!(serialize(&g, RdfFormat::Turtle), "@prefix ex: <http://ex.org/> .\n");
    }

    #[test]
    fn one_triple_is_one_line() {
        let g: Graph = [Triple::iris("http://x/s", "http://x/p", "http://x/o")].into_iter().collect();
        let nt = serialize(&g, RdfFormat::NTriples);
        assert_eq!(nt, "<http://x/s> <http://x/p> <http://x/o> .\n");
    }

    #[test]
    fn ntriples_lines_are_sorted() {
        let g = parse_turtle(include_str!("../../../../fixtures/toy1.ttl")).unwrap();
        let nt = serialize(&g, RdfFormat::NTriples);
        let lines: Vec<&str> = nt.lines().collect();
        let mut sorted = lines.clone();
        sorted.sort();
        assert_eq!(lines, sorted);
        assert_eq!(lines.len(), 7);
    }

    #[test]
    fn turtle_uses_prefixes_and_a() {
        let g = parse_turtle(include_str!("../../../../fixtures/toy1.ttl")).unwrap();
        let ttl = serialize(&g, RdfFormat::Turtle);
        assert!(ttl.contains(":e1 a rdfs:Class ."), "{ttl}");
        assert!(ttl.contains("rdfs:domain :e1, :e2"), "{ttl}");
    }

    #[test]
    fn toy1_round_trip() {
        let g = parse_turtle(include_str!("../../../../fixtures/toy1.ttl")).unwrap();
        let back = parse_turtle(&serialize(&g, RdfFormat::Turtle)).unwrap();
        assert_eq!(back.triple_set(), g.triple_set());
        let back = parse_ntriples(&serialize(&g, RdfFormat::NTriples)).unwrap();
        assert_eq!(back.triple_set(), g.triple_set());
    }

    #[test]
    fn awkward_literals_round_trip() {
        let doc = r#"@prefix ex: <http://ex.org/> .
            ex:s ex:p "tab\there", "quote\"back\\slash", """multi
line""", "bell\u0007", "x"^^<http://other/dt>, "y"@en-GB .
            ex:s ex:q [ ex:r ( 1 2.5 -3e2 ) ] ."#;
        let g = parse_turtle(doc).unwrap();
        for f in [RdfFormat::Turtle, RdfFormat::NTriples] {
            let text = serialize(&g, f);
            let back = match f {
                RdfFormat::Turtle => parse_turtle(&text).unwrap(),
                RdfFormat::NTriples => parse_ntriples(&text).unwrap(),
            };
            assert!(is_isomorphic(&g, &back), "{text}");
        }
    }

    #[test]
    fn unsafe_local_names_fall_back_to_full_iris() {
        let mut g: Graph = [Triple::iris("http://ex.org/a/b", "http://ex.org/p", "http://ex.org/c.")]
            .into_iter()
            .collect();
        g.add_prefix("ex", "http://ex.org/");
        let ttl = serialize(&g, RdfFormat::Turtle);
        assert!(ttl.contains("<http://ex.org/a/b>"));
        assert!(ttl.contains("<http://ex.org/c.>"));
        assert_eq!(parse_turtle(&ttl).unwrap().triple_set(), g.triple_set());
    }
}
