//! Graph equality up to blank-node relabelling.
//!
//! Colour refinement assigns each blank node a signature built from its
//! neighbourhood; a backtracking search then tries candidate bijections only
//! between nodes of equal colour.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{Graph, Term, Triple};

pub fn is_isomorphic(a: &Graph, b: &Graph) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let ground = |g: &Graph| -> BTreeSet<Triple> {
        g.triples()
            .filter(|t| !t.subject.is_blank() && !t.object.is_blank())
            .cloned()
            .collect()
    };
    if ground(a) != ground(b) {
        return false;
    }
    let blank_a: Vec<&Triple> = a.triples().filter(|t| t.subject.is_blank() || t.object.is_blank()).collect();
    let blank_b: Vec<&Triple> = b.triples().filter(|t| t.subject.is_blank() || t.object.is_blank()).collect();
    if blank_a.len() != blank_b.len() {
        return false;
    }
    let colours_a = refine(&blank_a);
    let colours_b = refine(&blank_b);
    let hist = |c: &HashMap<String, u64>| {
        let mut h: BTreeMap<u64, usize> = BTreeMap::new();
        for v in c.values() {
            *h.entry(*v).or_default() += 1;
        }
        h
    };
    if hist(&colours_a) != hist(&colours_b) {
        return false;
    }
    let target: BTreeSet<&Triple> = blank_b.iter().copied().collect();
    let mut nodes_a: Vec<&String> = colours_a.keys().collect();
    // Most constrained first: rarest colours.
    let freq = hist(&colours_a);
    nodes_a.sort_by_key(|n| (freq[&colours_a[*n]], colours_a[*n], (*n).clone()));
    let mut mapping: HashMap<String, String> = HashMap::new();
    let mut used: BTreeSet<String> = BTreeSet::new();
    search(&nodes_a, 0, &colours_a, &colours_b, &blank_a, &target, &mut mapping, &mut used)
}

#[allow(clippy::too_many_arguments)]
fn search(
    order: &[&String],
    depth: usize,
    colours_a: &HashMap<String, u64>,
    colours_b: &HashMap<String, u64>,
    triples_a: &[&Triple],
    target: &BTreeSet<&Triple>,
    mapping: &mut HashMap<String, String>,
    used: &mut BTreeSet<String>,
) -> bool {
    if depth == order.len() {
        return triples_a.iter().all(|t| target.contains(&relabel(t, mapping)));
    }
    let node = order[depth];
    let colour = colours_a[node];
    let mut candidates: Vec<&String> = colours_b
        .iter()
        .filter(|(n, c)| **c == colour && !used.contains(*n))
        .map(|(n, _)| n)
        .collect();
    candidates.sort();
    for cand in candidates {
        mapping.insert(node.clone(), cand.clone());
        used.insert(cand.clone());
        if consistent(triples_a, target, mapping)
            && search(order, depth + 1, colours_a, colours_b, triples_a, target, mapping, used)
        {
            return true;
        }
        mapping.remove(node);
        used.remove(cand);
    }
    false
}

// Every fully-mapped triple must exist on the other side.
fn consistent(triples_a: &[&Triple], target: &BTreeSet<&Triple>, mapping: &HashMap<String, String>) -> bool {
    triples_a.iter().all(|t| {
        let mapped = |term: &Term| match term {
            Term::BlankNode(l) => mapping.contains_key(l),
            _ => true,
        };
        !(mapped(&t.subject) && mapped(&t.object)) || target.contains(&relabel(t, mapping))
    })
}

fn relabel(t: &Triple, mapping: &HashMap<String, String>) -> Triple {
    let map = |term: &Term| match term {
        Term::BlankNode(l) => Term::BlankNode(mapping.get(l).cloned().unwrap_or_else(|| l.clone())),
        other => other.clone(),
    };
    Triple {
        subject: map(&t.subject),
        predicate: t.predicate.clone(),
        object: map(&t.object),
    }
}

fn refine(triples: &[&Triple]) -> HashMap<String, u64> {
    use std::hash::{DefaultHasher, Hash, Hasher};

    let mut colours: HashMap<String, u64> = HashMap::new();
    for t in triples {
        for term in [&t.subject, &t.object] {
            if let Term::BlankNode(l) = term {
                colours.insert(l.clone(), 0);
            }
        }
    }
    let describe = |term: &Term, colours: &HashMap<String, u64>| -> String {
        match term {
            Term::BlankNode(l) => format!("_#{}", colours[l]),
            other => other.to_string(),
        }
    };
    for _ in 0..colours.len().max(1) {
        let mut next: HashMap<String, u64> = HashMap::new();
        for node in colours.keys() {
            let mut sig: Vec<String> = Vec::new();
            for t in triples {
                if let Term::BlankNode(l) = &t.subject {
                    if l == node {
                        sig.push(format!("out {} {}", t.predicate, describe(&t.object, &colours)));
                    }
                }
                if let Term::BlankNode(l) = &t.object {
                    if l == node {
                        sig.push(format!("in {} {}", describe(&t.subject, &colours), t.predicate));
                    }
                }
            }
            sig.sort();
            let mut h = DefaultHasher::new();
            colours[node].hash(&mut h);
            sig.hash(&mut h);
            next.insert(node.clone(), h.finish());
        }
        let classes = |c: &HashMap<String, u64>| c.values().collect::<BTreeSet<_>>().len();
        let stable = classes(&next) == classes(&colours);
        colours = next;
        if stable {
            break;
        }
    }
    colours
}
