use proptest::prelude::*;
use schemaforge_core::rdf::{
    is_isomorphic, parse_ntriples, parse_turtle, serialize, Graph, Literal, RdfFormat, Term, Triple,
};

fn iri() -> impl Strategy<Value = Term> {
    prop_oneof![
        "[a-z]{1,6}".prop_map(|l| Term::iri(format!("http://ex.org/{l}"))),
        "[a-z]{1,4}".prop_map(|l| Term::iri(format!("http://ex.org/ns#{l}"))),
        "[a-z0-9._~-]{1,5}".prop_map(|l| Term::iri(format!("urn:x:{l}"))),
        Just(Term::iri("http://ex.org/with space")),
    ]
}

fn blank() -> impl Strategy<Value = Term> {
    (0u8..4).prop_map(|i| Term::blank(format!("n{i}")))
}

fn literal() -> impl Strategy<Value = Term> {
    let text = "(\\PC|[\"\\\\\n\r\t'])*";
    prop_oneof![
        text.prop_map(|s| Term::Literal(Literal::simple(s))),
        (text, "[a-z]{2}(-[A-Z]{2})?").prop_map(|(s, l)| Term::Literal(Literal::lang(s, l))),
        ("-?[0-9]{1,4}", Just("http://www.w3.org/2001/XMLSchema#integer"))
            .prop_map(|(s, d)| Term::Literal(Literal::typed(s, d))),
        (text, Just("http://ex.org/dt")).prop_map(|(s, d)| Term::Literal(Literal::typed(s, d))),
    ]
}

fn graph() -> impl Strategy<Value = Graph> {
    let subject = prop_oneof![3 => iri(), 1 => blank()];
    let object = prop_oneof![2 => iri(), 1 => blank(), 2 => literal()];
    proptest::collection::vec((subject, iri(), object), 0..25).prop_map(|ts| {
        let mut g: Graph = ts
            .into_iter()
            .filter_map(|(s, p, o)| Triple::new(s, p, o))
            .collect();
        g.add_prefix("ex", "http://ex.org/");
        g.add_prefix("ns", "http://ex.org/ns#");
        g
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn round_trip_both_formats(g in graph()) {
        let ttl = serialize(&g, RdfFormat::Turtle);
        let back = parse_turtle(&ttl).map_err(|e| TestCaseError::fail(format!("{e}\n{ttl}")))?;
        prop_assert!(is_isomorphic(&g, &back), "{}", ttl);
        let nt = serialize(&g, RdfFormat::NTriples);
        let back = parse_ntriples(&nt).map_err(|e| TestCaseError::fail(format!("{e}\n{nt}")))?;
        prop_assert!(is_isomorphic(&g, &back), "{}", nt);
        prop_assert_eq!(nt.lines().count(), g.len());
    }

    #[test]
    fn output_ignores_insertion_order(g in graph()) {
        let mut reversed: Graph = g.triple_set().iter().rev().cloned().collect();
        for (p, ns) in g.prefixes().iter().rev() {
            reversed.add_prefix(p.clone(), ns.clone());
        }
        for f in [RdfFormat::Turtle, RdfFormat::NTriples] {
            prop_assert_eq!(serialize(&g, f), serialize(&reversed, f));
        }
    }

    #[test]
    fn isomorphism_ignores_relabelling(g in graph(), shift in 1u8..50) {
        let relabel = |t: &Term| match t {
            Term::BlankNode(l) => Term::blank(format!("z{shift}{l}")),
            other => other.clone(),
        };
        let h: Graph = g
            .triples()
            .map(|t| Triple::new(relabel(&t.subject), t.predicate.clone(), relabel(&t.object)).unwrap())
            .collect();
        prop_assert!(is_isomorphic(&g, &h));
    }
}
