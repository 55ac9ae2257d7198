mod support;

use std::collections::BTreeSet;

use mskg_core::kg::{Iri, KnowledgeGraph, Literal, Term, Triple};
use mskg_core::query::{evaluate, parse_query, variables, BindingSet, PatternTerm, QueryError, TriplePattern};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use support::{bgp_oracle, random_bgp, vocab_graph};

fn rows(set: &BindingSet) -> BTreeSet<Vec<String>> {
    set.solutions.iter().map(|r| r.iter().map(Term::to_string).collect()).collect()
}

fn substitute(p: &PatternTerm, vars: &[String], row: &[Term]) -> Term {
    match p {
        PatternTerm::Var(v) => row[vars.iter().position(|x| x == v).unwrap()].clone(),
        PatternTerm::Term(t) => t.clone(),
    }
}

/// A graph and BGP sized so that brute-force enumeration stays cheap.
fn instance(rng: &mut StdRng) -> (KnowledgeGraph, Vec<TriplePattern>) {
    if rng.gen_bool(0.25) {
        let blanks = rng.gen_bool(0.5);
        let g = support::random_graph(rng, 150, blanks);
        let bgp = random_bgp(rng, &g, 4, 2);
        (g, bgp)
    } else {
        let (nodes, preds, lits, n) =
            (rng.gen_range(2..=12), rng.gen_range(1..=4), rng.gen_range(0..=4), rng.gen_range(0..=1000));
        let g = vocab_graph(rng, nodes, preds, lits, n);
        let bgp = random_bgp(rng, &g, 4, 4);
        (g, bgp)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn evaluate_matches_brute_force_and_ignores_pattern_order(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (g, bgp) = instance(&mut rng);
        let got = evaluate(&bgp, &g);
        prop_assert_eq!(&got.variables, &variables(&bgp));
        prop_assert_eq!(rows(&got), bgp_oracle(&bgp, &g));

        for row in &got.solutions {
            for p in &bgp {
                let s = substitute(&p.subject, &got.variables, row);
                let Term::Iri(pred) = substitute(&p.predicate, &got.variables, row) else {
                    return Err(TestCaseError::fail("non-IRI predicate bound"));
                };
                let o = substitute(&p.object, &got.variables, row);
                prop_assert!(g.contains(&Triple::new(s, pred, o).unwrap()));
            }
        }

        let mut shuffled = bgp.clone();
        shuffled.shuffle(&mut rng);
        let again = evaluate(&shuffled, &g).project(&got.variables).unwrap();
        prop_assert_eq!(again, got);
    }
}

#[test]
fn spec_examples() {
    let iri = |s: &str| Iri::new(format!("http://x.test/{s}")).unwrap();
    let g: KnowledgeGraph = [
        Triple::new(iri("a"), iri("p"), iri("b")).unwrap(),
        Triple::new(iri("b"), iri("p"), iri("c")).unwrap(),
        Triple::new(iri("a"), iri("q"), Literal::string("x")).unwrap(),
    ]
    .into_iter()
    .collect();
    assert_eq!(evaluate(&parse_query("?s ?p ?o").unwrap(), &g).len(), 3);

    let q = parse_query("?m jdlo:hasPage ?p . ?p jdlo:hasRegion ?r").unwrap();
    assert_eq!(q.len(), 2);
    assert_eq!(variables(&q), vec!["m", "p", "r"]);
    assert!(matches!(parse_query("?r rdf:type"), Err(QueryError::Syntax { .. })));

    let fig1 = support::fig1_graph();
    let stamps = evaluate(&parse_query("?r rdf:type jdlo:Stamp").unwrap(), &fig1);
    assert_eq!(stamps.len(), 1);
    assert!(stamps.solutions[0][0].to_string().ends_with("/region/s1>"));
}

#[test]
fn stamp_query_on_fig1_joins_through_pages() {
    let q = parse_query("?m jdlo:hasPage ?p . ?p jdlo:hasRegion ?r . ?r a jdlo:Stamp").unwrap();
    let out = evaluate(&q, &support::fig1_graph()).project(&["m".to_string()]).unwrap();
    assert_eq!(out.to_tsv(), "?m\n<https://example.org/jdl/resource/ms/oai%3Ajbc%3A1>\n");
}

#[test]
fn joins_agree_with_oracle_on_fig1() {
    let g = support::fig1_graph();
    for text in [
        "?r jdlo:belongsToSection ?s . ?s a jdlo:Paragraph",
        "?m a jdlo:Manuscript . ?m dcterms:subject ?subj",
        "?a jdlo:x ?x . ?b jdlo:x ?x",
        "?r jdlo:confidence \"0.870000\"^^xsd:decimal",
    ] {
        let q = parse_query(text).unwrap();
        assert_eq!(rows(&evaluate(&q, &g)), bgp_oracle(&q, &g), "{text}");
    }
}
