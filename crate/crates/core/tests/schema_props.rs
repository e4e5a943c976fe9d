use std::collections::BTreeSet;

use proptest::prelude::*;
use schemaforge_core::cue::{column_sum, cue_e, cue_er, cue_k, cue_kr, cue_p, cue_report, CueError};
use schemaforge_core::fca::{build_context, export_fca_csv, import_fca_csv};
use schemaforge_core::intersections::compute_regions;
use schemaforge_core::schema::{PredicateFilter, SchemaContext};

fn e(i: usize) -> String {
    format!("http://ex.org/E{i}")
}

fn p(j: usize) -> String {
    format!("http://ex.org/p{j}")
}

// (n_etypes, n_props, incidence bits row-major)
fn schema_strategy(max_e: usize, max_p: usize) -> impl Strategy<Value = SchemaContext> {
    (0..=max_e, 0..=max_p)
        .prop_flat_map(|(ne, np)| (Just(ne), Just(np), proptest::collection::vec(any::<bool>(), ne * np)))
        .prop_map(|(ne, np, bits)| {
            let incidence = (0..ne)
                .flat_map(|i| (0..np).map(move |j| (i, j)))
                .filter(|(i, j)| bits[i * np + j])
                .map(|(i, j)| (e(i), p(j)));
            SchemaContext::new((0..ne).map(e), (0..np).map(p), incidence.collect::<Vec<_>>()).unwrap()
        })
}

// Oracle working from the raw pair list only.
struct Oracle {
    pairs: Vec<(String, String)>,
}

impl Oracle {
    fn new(s: &SchemaContext) -> Self {
        Oracle {
            pairs: s.incidence().iter().cloned().collect(),
        }
    }

    fn dom_size(&self, prop: &str) -> usize {
        self.pairs.iter().filter(|(_, q)| q == prop).count()
    }

    fn props_of(&self, et: &str) -> Vec<&str> {
        self.pairs.iter().filter(|(x, _)| x == et).map(|(_, q)| q.as_str()).collect()
    }

    fn cue_p(&self, prop: &str, et: &str) -> f64 {
        let poe = self.pairs.iter().any(|(x, q)| x == et && q == prop) as usize;
        let dom = self.dom_size(prop);
        if dom == 0 {
            0.0
        } else {
            poe as f64 / dom as f64
        }
    }

    fn cue_e(&self, et: &str) -> f64 {
        let mut terms: Vec<f64> = self.props_of(et).iter().map(|q| self.cue_p(q, et)).collect();
        // sum as exact rationals: every term is 1/k for an integer k
        terms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rational_sum(&terms)
    }
}

// Sums 1/k terms as an exact fraction, then converts once.
fn rational_sum(terms: &[f64]) -> f64 {
    let (mut num, mut den): (u128, u128) = (0, 1);
    for t in terms {
        let k = (1.0 / t).round() as u128;
        num = num * k + den;
        den *= k;
        let g = gcd(num, den);
        num /= g;
        den /= g;
    }
    num as f64 / den as f64
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_match_brute_force(s in schema_strategy(8, 12)) {
        let o = Oracle::new(&s);
        for et in s.etypes() {
            for prop in s.properties() {
                prop_assert_eq!(cue_p(&s, prop, et).unwrap(), o.cue_p(prop, et));
            }
            let expected = o.cue_e(et);
            prop_assert!((cue_e(&s, et).unwrap() - expected).abs() <= 1e-12);
            let n = o.props_of(et).len();
            let er = if n == 0 { 0.0 } else { expected / n as f64 };
            prop_assert!((cue_er(&s, et).unwrap() - er).abs() <= 1e-12);
        }
        let with_domain = s.properties().iter().filter(|q| o.dom_size(q) > 0).count();
        let total_pairs = o.pairs.len();
        prop_assert!((cue_k(&s) - with_domain as f64).abs() <= 1e-9);
        if total_pairs == 0 {
            prop_assert_eq!(cue_kr(&s), Err(CueError::DegenerateSchema));
        } else {
            prop_assert_eq!(cue_kr(&s).unwrap(), with_domain as f64 / total_pairs as f64);
        }
    }

    #[test]
    fn identity_law_and_ranges(s in schema_strategy(10, 20)) {
        for prop in s.properties() {
            let sum = column_sum(&s, prop).unwrap();
            if s.dom(prop).is_empty() {
                prop_assert_eq!(sum, 0.0);
            } else {
                prop_assert_eq!(sum, 1.0);
            }
        }
        prop_assert!((cue_k(&s) - s.properties_with_domain() as f64).abs() <= 1e-9);
        if let Ok(kr) = cue_kr(&s) {
            prop_assert!(kr > 0.0 && kr <= 1.0);
        }
        for et in s.etypes() {
            let er = cue_er(&s, et).unwrap();
            prop_assert!((0.0..=1.0).contains(&er));
            for prop in s.properties() {
                let v = cue_p(&s, prop, et).unwrap();
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert_eq!(v == 1.0, s.dom(prop).len() == 1 && s.dom(prop).contains(et));
            }
        }
    }

    #[test]
    fn report_is_ordered_and_consistent(s in schema_strategy(8, 12)) {
        let r = cue_report(&s);
        prop_assert_eq!(r.per_etype.len(), s.etypes().len());
        for w in r.per_etype.windows(2) {
            prop_assert!(w[0].cue_e > w[1].cue_e || (w[0].cue_e == w[1].cue_e && w[0].etype < w[1].etype));
        }
        prop_assert_eq!(r.schema_level.cue_k, cue_k(&s));
        prop_assert_eq!(r.schema_level.n_props_total, s.properties().len());
    }

    #[test]
    fn context_sums_match_schema(s in schema_strategy(8, 12)) {
        let ctx = build_context(&s);
        prop_assert_eq!(ctx.ones(), s.incidence().len());
        for (i, et) in ctx.row_labels.iter().enumerate() {
            prop_assert_eq!(ctx.row_sum(i), s.prop(et).len());
        }
        for (j, prop) in ctx.col_labels.iter().enumerate() {
            prop_assert_eq!(ctx.col_sum(j), s.dom(prop).len());
        }
        prop_assert!(ctx.row_labels.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(ctx.col_labels.windows(2).all(|w| w[0] < w[1]));
        let bytes = export_fca_csv(&ctx);
        prop_assert_eq!(&bytes, &export_fca_csv(&ctx));
        prop_assert_eq!(import_fca_csv(&bytes).unwrap(), ctx);
    }

    #[test]
    fn regions_match_brute_force(s in schema_strategy(10, 40), seed in any::<u64>()) {
        let ctx = build_context(&s);
        prop_assume!(ctx.n_rows() >= 2);
        // a seed-dependent selection of at least two rows
        let mut selected: Vec<String> = ctx
            .row_labels
            .iter()
            .enumerate()
            .filter(|(i, _)| (seed >> (i % 64)) & 1 == 1)
            .map(|(_, l)| l.clone())
            .collect();
        if selected.len() < 2 {
            selected = ctx.row_labels[..2].to_vec();
        }
        let table = compute_regions(&ctx, &selected).unwrap();
        let mut union = BTreeSet::new();
        for prop in s.properties() {
            let mask = selected
                .iter()
                .enumerate()
                .filter(|(_, et)| s.is_associated(et, prop))
                .fold(0u32, |m, (i, _)| m | (1 << i));
            if mask != 0 {
                union.insert(prop.clone());
                prop_assert!(table.region(mask).contains(prop));
            }
        }
        let placed: usize = table.non_empty().map(|(_, r)| r.len()).sum();
        prop_assert_eq!(placed, union.len());

        // reversing the selection mirrors every mask
        let reversed: Vec<String> = selected.iter().rev().cloned().collect();
        let rev_table = compute_regions(&ctx, &reversed).unwrap();
        let k = selected.len();
        for (mask, props) in table.non_empty() {
            let mirrored = (0..k).filter(|i| mask & (1 << i) != 0).fold(0u32, |m, i| m | (1 << (k - 1 - i)));
            prop_assert_eq!(&rev_table.region(mirrored), props);
        }
    }

    #[test]
    fn filters(s in schema_strategy(6, 10), keep in proptest::collection::vec(any::<bool>(), 10)) {
        let all: BTreeSet<String> = s.properties().clone();
        prop_assert_eq!(&s.filter_predicates(&PredicateFilter::Include(all.clone())).schema, &s);
        let none = s.filter_predicates(&PredicateFilter::Exclude(all));
        prop_assert!(none.schema.incidence().is_empty());
        let chosen: BTreeSet<String> = s
            .properties()
            .iter()
            .enumerate()
            .filter(|(j, _)| keep[*j])
            .map(|(_, q)| q.clone())
            .collect();
        let kept = s.filter_predicates(&PredicateFilter::Include(chosen.clone())).schema;
        for (et, prop) in s.incidence() {
            prop_assert_eq!(kept.is_associated(et, prop), chosen.contains(prop));
        }
    }
}
