//! Translational embeddings of schema-level triples.
//!
//! Score `f(h, r, t) = -‖v_h + v_r - v_t‖₂`, trained with the margin ranking
//! loss `max(0, γ + d(pos) - d(neg))` by plain SGD, one positive and one
//! corrupted triple at a time.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rdf::{vocab, Graph, Term};
use crate::schema::{extract_schema, ExtractionConfig};

/// Relation linking an entity type to each of its properties.
pub const HAS_PROPERTY: &str = "urn:schemaforge:hasProperty";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("the graph yields no embeddable triples")]
    NoTriples,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("training diverged at epoch {epoch}: mean loss {loss}")]
    Divergence { epoch: usize, loss: f64 },
    #[error("unknown symbol <{0}>")]
    UnknownSymbol(String),
    #[error("EMB line {line}: {message}")]
    Format { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TripleMode {
    SchemaIncidence,
    RawIriTriples,
}

impl FromStr for TripleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "schema_incidence" | "schema-incidence" => Ok(TripleMode::SchemaIncidence),
            "raw_iri_triples" | "raw-iri-triples" | "raw" => Ok(TripleMode::RawIriTriples),
            other => Err(format!("unknown triple mode {other:?}")),
        }
    }
}

/// Entities and relations sorted, triples deduplicated and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TripleIndex {
    pub entities: Vec<String>,
    pub relations: Vec<String>,
    pub triples: Vec<(usize, usize, usize)>,
}

impl TripleIndex {
    pub fn from_iri_triples<I, S>(triples: I) -> Self
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: Into<String>,
    {
        let named: BTreeSet<(String, String, String)> =
            triples.into_iter().map(|(h, r, t)| (h.into(), r.into(), t.into())).collect();
        let entities: BTreeSet<&String> = named.iter().flat_map(|(h, _, t)| [h, t]).collect();
        let relations: BTreeSet<&String> = named.iter().map(|(_, r, _)| r).collect();
        let e_idx: BTreeMap<&String, usize> = entities.iter().enumerate().map(|(i, e)| (*e, i)).collect();
        let r_idx: BTreeMap<&String, usize> = relations.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let mut index: Vec<(usize, usize, usize)> =
            named.iter().map(|(h, r, t)| (e_idx[h], r_idx[r], e_idx[t])).collect();
        index.sort_unstable();
        TripleIndex {
            entities: entities.into_iter().cloned().collect(),
            relations: relations.into_iter().cloned().collect(),
            triples: index,
        }
    }

    pub fn entity(&self, iri: &str) -> Option<usize> {
        self.entities.binary_search_by(|e| e.as_str().cmp(iri)).ok()
    }

    pub fn relation(&self, iri: &str) -> Option<usize> {
        self.relations.binary_search_by(|r| r.as_str().cmp(iri)).ok()
    }
}

pub fn prepare_triples(graph: &Graph, mode: TripleMode, config: &ExtractionConfig) -> Result<TripleIndex, EmbedError> {
    let mut named: Vec<(String, String, String)> = Vec::new();
    match mode {
        TripleMode::RawIriTriples => {
            for t in graph.triples() {
                if let (Term::Iri(s), Term::Iri(p), Term::Iri(o)) = (&t.subject, &t.predicate, &t.object) {
                    named.push((s.clone(), p.clone(), o.clone()));
                }
            }
        }
        TripleMode::SchemaIncidence => {
            if let Ok(schema) = extract_schema(graph, config) {
                for (e, p) in schema.incidence() {
                    named.push((e.clone(), HAS_PROPERTY.to_string(), p.clone()));
                }
            }
            let sub_class_of = Term::iri(vocab::RDFS_SUBCLASS_OF);
            for t in graph.match_pattern(None, Some(&sub_class_of), None) {
                if let (Term::Iri(sub), Term::Iri(sup)) = (&t.subject, &t.object) {
                    named.push((sub.clone(), vocab::RDFS_SUBCLASS_OF.to_string(), sup.clone()));
                }
            }
        }
    }
    if named.is_empty() {
        return Err(EmbedError::NoTriples);
    }
    Ok(TripleIndex::from_iri_triples(named))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub dim: usize,
    pub learning_rate: f64,
    pub margin: f64,
    pub epochs: usize,
    pub negatives: usize,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            dim: 8,
            learning_rate: 0.01,
            margin: 1.0,
            epochs: 200,
            negatives: 1,
            seed: 42,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), EmbedError> {
        let bad = |m: &str| Err(EmbedError::InvalidHyperparams(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return bad("margin must be positive");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        if self.negatives == 0 {
            return bad("at least one negative sample per positive is required");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub entities: Vec<String>,
    pub relations: Vec<String>,
    pub entity_vectors: Vec<Vec<f64>>,
    pub relation_vectors: Vec<Vec<f64>>,
    pub hyperparams: Hyperparams,
    /// Mean per-sample loss of each epoch.
    pub training_log: Vec<f64>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn project_to_unit_ball(v: &mut [f64]) {
    let n = norm(v);
    if n > 1.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// `‖h + r - t‖₂`.
pub fn distance(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    h.iter()
        .zip(r)
        .zip(t)
        .map(|((h, r), t)| {
            let d = h + r - t;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Vectors of a positive and a corrupted triple. The two relation slots are
/// treated as independent inputs; in training they are the same vector.
#[derive(Debug, Clone, Copy)]
pub struct LossInput<'a> {
    pub pos: [&'a [f64]; 3],
    pub neg: [&'a [f64]; 3],
    pub margin: f64,
}

/// Gradients with respect to `pos[i]` and `neg[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossGradient {
    pub pos: [Vec<f64>; 3],
    pub neg: [Vec<f64>; 3],
}

pub fn margin_loss(x: &LossInput) -> f64 {
    let [h, r, t] = x.pos;
    let [hn, rn, tn] = x.neg;
    let v = x.margin + distance(h, r, t) - distance(hn, rn, tn);
    // NaN passes through so that divergence is detected
    if v < 0.0 {
        0.0
    } else {
        v
    }
}

// d‖h+r-t‖/dh = (h+r-t)/‖h+r-t‖; zero at the non-differentiable point.
fn distance_gradient(h: &[f64], r: &[f64], t: &[f64]) -> Vec<f64> {
    let d = distance(h, r, t);
    if d == 0.0 {
        return vec![0.0; h.len()];
    }
    h.iter().zip(r).zip(t).map(|((h, r), t)| (h + r - t) / d).collect()
}

pub fn margin_loss_gradient(x: &LossInput) -> LossGradient {
    let dim = x.pos[0].len();
    if margin_loss(x) <= 0.0 {
        let zero = || vec![0.0; dim];
        return LossGradient {
            pos: [zero(), zero(), zero()],
            neg: [zero(), zero(), zero()],
        };
    }
    let gp = distance_gradient(x.pos[0], x.pos[1], x.pos[2]);
    let gn = distance_gradient(x.neg[0], x.neg[1], x.neg[2]);
    let neg_of = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<f64>>();
    LossGradient {
        pos: [gp.clone(), gp.clone(), neg_of(&gp)],
        neg: [neg_of(&gn), neg_of(&gn), gn],
    }
}

impl EmbeddingModel {
    /// The untrained model: uniform entries in ±6/√d, relation vectors scaled
    /// to unit length and entity vectors projected into the unit ball.
    pub fn initialise(index: &TripleIndex, hp: &Hyperparams) -> Result<Self, EmbedError> {
        hp.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
        Ok(Self::initialise_with(index, hp, &mut rng))
    }

    fn initialise_with(index: &TripleIndex, hp: &Hyperparams, rng: &mut ChaCha8Rng) -> Self {
        let bound = 6.0 / (hp.dim as f64).sqrt();
        let mut draw = |n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|_| (0..hp.dim).map(|_| rng.random_range(-bound..=bound)).collect())
                .collect()
        };
        let mut relation_vectors = draw(index.relations.len());
        let mut entity_vectors = draw(index.entities.len());
        for v in &mut relation_vectors {
            let n = norm(v);
            if n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
            }
        }
        entity_vectors.iter_mut().for_each(|v| project_to_unit_ball(v));
        EmbeddingModel {
            entities: index.entities.clone(),
            relations: index.relations.clone(),
            entity_vectors,
            relation_vectors,
            hyperparams: hp.clone(),
            training_log: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.hyperparams.dim
    }

    fn entity(&self, iri: &str) -> Result<usize, EmbedError> {
        self.entities
            .binary_search_by(|e| e.as_str().cmp(iri))
            .map_err(|_| EmbedError::UnknownSymbol(iri.to_string()))
    }

    fn relation(&self, iri: &str) -> Result<usize, EmbedError> {
        self.relations
            .binary_search_by(|r| r.as_str().cmp(iri))
            .map_err(|_| EmbedError::UnknownSymbol(iri.to_string()))
    }

    /// Resolves IRIs to `(head, relation, tail)` indices.
    pub fn index_triple(&self, h: &str, r: &str, t: &str) -> Result<(usize, usize, usize), EmbedError> {
        Ok((self.entity(h)?, self.relation(r)?, self.entity(t)?))
    }

    fn score_indexed(&self, h: usize, r: usize, t: usize) -> f64 {
        -distance(&self.entity_vectors[h], &self.relation_vectors[r], &self.entity_vectors[t])
    }
}

pub fn train(index: &TripleIndex, hp: &Hyperparams) -> Result<EmbeddingModel, EmbedError> {
    hp.validate()?;
    if index.triples.is_empty() {
        return Err(EmbedError::NoTriples);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);
    let mut model = EmbeddingModel::initialise_with(index, hp, &mut rng);
    let n_entities = index.entities.len();
    let mut order: Vec<usize> = (0..index.triples.len()).collect();
    for epoch in 1..=hp.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        let mut samples = 0usize;
        for &i in &order {
            let (h, r, t) = index.triples[i];
            for _ in 0..hp.negatives {
                let corrupt = rng.random_range(0..n_entities);
                let (hn, tn) = if rng.random_bool(0.5) { (corrupt, t) } else { (h, corrupt) };
                total += sgd_step(&mut model, (h, r, t), (hn, r, tn), hp);
                samples += 1;
            }
        }
        let mean = total / samples as f64;
        if !mean.is_finite() {
            return Err(EmbedError::Divergence { epoch, loss: mean });
        }
        model.training_log.push(mean);
        model.entity_vectors.iter_mut().for_each(|v| project_to_unit_ball(v));
    }
    Ok(model)
}

fn sgd_step(model: &mut EmbeddingModel, pos: (usize, usize, usize), neg: (usize, usize, usize), hp: &Hyperparams) -> f64 {
    let e = &model.entity_vectors;
    let rv = &model.relation_vectors;
    let input = LossInput {
        pos: [&e[pos.0], &rv[pos.1], &e[pos.2]],
        neg: [&e[neg.0], &rv[neg.1], &e[neg.2]],
        margin: hp.margin,
    };
    let loss = margin_loss(&input);
    if loss <= 0.0 {
        return loss;
    }
    let g = margin_loss_gradient(&input);
    let lr = hp.learning_rate;
    let apply = |v: &mut Vec<f64>, grad: &[f64]| v.iter_mut().zip(grad).for_each(|(x, g)| *x -= lr * g);
    // all gradients are computed before any vector moves
    apply(&mut model.entity_vectors[pos.0], &g.pos[0]);
    apply(&mut model.relation_vectors[pos.1], &g.pos[1]);
    apply(&mut model.entity_vectors[pos.2], &g.pos[2]);
    apply(&mut model.entity_vectors[neg.0], &g.neg[0]);
    apply(&mut model.relation_vectors[neg.1], &g.neg[1]);
    apply(&mut model.entity_vectors[neg.2], &g.neg[2]);
    loss
}

pub fn score(model: &EmbeddingModel, h: &str, r: &str, t: &str) -> Result<f64, EmbedError> {
    let (h, r, t) = model.index_triple(h, r, t)?;
    Ok(model.score_indexed(h, r, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankSummary {
    pub mean_rank: f64,
    pub hits_at_3: f64,
    pub n: usize,
}

/// Raw rank of `t` among all entities as tail of `(h, r, ·)`; ties go to the
/// lower entity index.
pub fn raw_rank(model: &EmbeddingModel, (h, r, t): (usize, usize, usize)) -> usize {
    let truth = model.score_indexed(h, r, t);
    1 + (0..model.entities.len())
        .filter(|&c| {
            let s = model.score_indexed(h, r, c);
            s > truth || (s == truth && c < t)
        })
        .count()
}

/// Mean raw rank and hits@3. An empty list gives zeros with `n = 0`.
pub fn evaluate_mean_rank(model: &EmbeddingModel, held_out: &[(usize, usize, usize)]) -> RankSummary {
    if held_out.is_empty() {
        return RankSummary {
            mean_rank: 0.0,
            hits_at_3: 0.0,
            n: 0,
        };
    }
    let ranks: Vec<usize> = held_out.par_iter().map(|&tr| raw_rank(model, tr)).collect();
    let n = ranks.len() as f64;
    RankSummary {
        mean_rank: ranks.iter().sum::<usize>() as f64 / n,
        hits_at_3: ranks.iter().filter(|r| **r <= 3).count() as f64 / n,
        n: ranks.len(),
    }
}

fn check_label(iri: &str) {
    debug_assert!(!iri.contains(['\t', '\n', '\r']), "EMB labels cannot contain tabs or newlines");
}

pub fn export_emb(model: &EmbeddingModel) -> String {
    let hp = &model.hyperparams;
    let mut out = format!(
        "emb v1 dim={} entities={} relations={} seed={}\n",
        hp.dim,
        model.entities.len(),
        model.relations.len(),
        hp.seed
    );
    let rows = model
        .entities
        .iter()
        .zip(&model.entity_vectors)
        .map(|(l, v)| ('E', l, v))
        .chain(model.relations.iter().zip(&model.relation_vectors).map(|(l, v)| ('R', l, v)));
    for (kind, label, vector) in rows {
        check_label(label);
        let _ = write!(out, "{kind}\t{label}\t");
        for (i, x) in vector.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x}");
        }
        out.push('\n');
    }
    out
}

/// Reads an EMB file. Only `dim` and `seed` of the hyperparameters are stored
/// in the file; the rest take their defaults and the training log is empty.
pub fn import_emb(text: &str) -> Result<EmbeddingModel, EmbedError> {
    let err = |line: usize, message: String| EmbedError::Format { line, message };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let mut fields = header.split(' ');
    if fields.next() != Some("emb") || fields.next() != Some("v1") {
        return Err(err(1, "expected header \"emb v1 ...\"".into()));
    }
    let mut values: BTreeMap<&str, u64> = BTreeMap::new();
    for f in fields {
        let (k, v) = f.split_once('=').ok_or_else(|| err(1, format!("bad header field {f:?}")))?;
        let v: u64 = v.parse().map_err(|_| err(1, format!("bad number in {f:?}")))?;
        values.insert(k, v);
    }
    let get = |k: &str| values.get(k).copied().ok_or_else(|| err(1, format!("header lacks {k}")));
    let dim = get("dim")? as usize;
    let (n_entities, n_relations) = (get("entities")? as usize, get("relations")? as usize);
    let mut model = EmbeddingModel {
        entities: Vec::new(),
        relations: Vec::new(),
        entity_vectors: Vec::new(),
        relation_vectors: Vec::new(),
        hyperparams: Hyperparams {
            dim,
            seed: get("seed")?,
            ..Hyperparams::default()
        },
        training_log: Vec::new(),
    };
    for (n, line) in lines {
        let mut parts = line.splitn(3, '\t');
        let (kind, label, vector) = match (parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(l), Some(v)) => (k, l, v),
            _ => return Err(err(n, "expected three tab-separated fields".into())),
        };
        let vector = vector
            .split(' ')
            .map(|x| x.parse::<f64>().map_err(|_| err(n, format!("bad number {x:?}"))))
            .collect::<Result<Vec<f64>, _>>()?;
        if vector.len() != dim {
            return Err(err(n, format!("{} values, expected {dim}", vector.len())));
        }
        match kind {
            "E" => {
                model.entities.push(label.to_string());
                model.entity_vectors.push(vector);
            }
            "R" => {
                model.relations.push(label.to_string());
                model.relation_vectors.push(vector);
            }
            other => return Err(err(n, format!("unknown row kind {other:?}"))),
        }
    }
    if model.entities.len() != n_entities || model.relations.len() != n_relations {
        return Err(err(1, "row counts disagree with the header".into()));
    }
    let sorted = |v: &[String]| v.windows(2).all(|w| w[0] < w[1]);
    if !sorted(&model.entities) || !sorted(&model.relations) {
        return Err(err(1, "labels must be sorted and unique".into()));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    const TOY1: &str = include_str!("../../../fixtures/toy1.ttl");

    fn t(local: &str) -> String {
        format!("http://example.org/toy#{local}")
    }

    fn toy1_index() -> TripleIndex {
        prepare_triples(&parse_turtle(TOY1).unwrap(), TripleMode::SchemaIncidence, &ExtractionConfig::default())
            .unwrap()
    }

    #[test]
    fn toy1_raw_triples() {
        let idx = prepare_triples(&parse_turtle(TOY1).unwrap(), TripleMode::RawIriTriples, &ExtractionConfig::default())
            .unwrap();
        assert_eq!(idx.triples.len(), 7);
        assert_eq!(idx.relations, vec![vocab::RDF_TYPE.to_string(), vocab::RDFS_DOMAIN.to_string()]);
    }

    #[test]
    fn toy1_incidence_triples() {
        let idx = toy1_index();
        let named: Vec<(&str, &str, &str)> = idx
            .triples
            .iter()
            .map(|&(h, r, t)| (idx.entities[h].as_str(), idx.relations[r].as_str(), idx.entities[t].as_str()))
            .collect();
        let (e1, e2, p1, p2) = (t("e1"), t("e2"), t("p1"), t("p2"));
        assert_eq!(
            named,
            vec![
                (e1.as_str(), HAS_PROPERTY, p1.as_str()),
                (e1.as_str(), HAS_PROPERTY, p2.as_str()),
                (e2.as_str(), HAS_PROPERTY, p2.as_str()),
            ]
        );
    }

    #[test]
    fn subclass_triples_are_included() {
        let g = parse_turtle(
            "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .
             <http://x/A> a rdfs:Class . <http://x/B> rdfs:subClassOf <http://x/A> .",
        )
        .unwrap();
        let idx = prepare_triples(&g, TripleMode::SchemaIncidence, &ExtractionConfig::default()).unwrap();
        assert_eq!(idx.triples.len(), 1);
        assert_eq!(idx.relations, vec![vocab::RDFS_SUBCLASS_OF.to_string()]);
    }

    #[test]
    fn literal_only_graph_has_nothing_to_embed() {
        let g = parse_turtle(r#"<http://x/s> <http://x/p> "a", 1 ."#).unwrap();
        for mode in [TripleMode::RawIriTriples, TripleMode::SchemaIncidence] {
            assert_eq!(prepare_triples(&g, mode, &ExtractionConfig::default()), Err(EmbedError::NoTriples));
        }
    }

    #[test]
    fn hyperparameter_validation() {
        let idx = toy1_index();
        for hp in [
            Hyperparams { epochs: 0, ..Default::default() },
            Hyperparams { dim: 0, ..Default::default() },
            Hyperparams { margin: 0.0, ..Default::default() },
            Hyperparams { learning_rate: -1.0, ..Default::default() },
            Hyperparams { learning_rate: f64::NAN, ..Default::default() },
            Hyperparams { negatives: 0, ..Default::default() },
        ] {
            assert!(matches!(train(&idx, &hp), Err(EmbedError::InvalidHyperparams(_))), "{hp:?}");
        }
    }

    #[test]
    fn training_is_deterministic_and_bounded() {
        let idx = toy1_index();
        let hp = Hyperparams::default();
        let a = train(&idx, &hp).unwrap();
        let b = train(&idx, &hp).unwrap();
        assert_eq!(a, b);
        assert_eq!(export_emb(&a), export_emb(&b));
        assert_eq!(a.training_log.len(), 200);
        assert!(a.training_log.last().unwrap() <= a.training_log.first().unwrap());
        for v in &a.entity_vectors {
            assert!(norm(v) <= 1.0 + 1e-6);
        }
        let c = train(&idx, &Hyperparams { seed: 7, ..hp }).unwrap();
        assert_ne!(a.entity_vectors, c.entity_vectors);
    }

    #[test]
    fn huge_learning_rate_diverges() {
        let idx = toy1_index();
        let hp = Hyperparams { learning_rate: f64::MAX, ..Default::default() };
        assert!(matches!(train(&idx, &hp), Err(EmbedError::Divergence { .. })), "{:?}", train(&idx, &hp).map(|m| m.training_log[..3].to_vec()));
    }

    fn model_with(entities: Vec<Vec<f64>>, relations: Vec<Vec<f64>>) -> EmbeddingModel {
        EmbeddingModel {
            entities: (0..entities.len()).map(|i| format!("e{i}")).collect(),
            relations: (0..relations.len()).map(|i| format!("r{i}")).collect(),
            hyperparams: Hyperparams { dim: entities[0].len(), ..Default::default() },
            entity_vectors: entities,
            relation_vectors: relations,
            training_log: Vec::new(),
        }
    }

    #[test]
    fn score_identity_and_errors() {
        let m = model_with(vec![vec![0.3, -0.2], vec![5.0, 5.0]], vec![vec![0.0, 0.0]]);
        assert_eq!(score(&m, "e0", "r0", "e0").unwrap(), 0.0);
        assert!((score(&m, "e0", "r0", "e1").unwrap() + (4.7f64.powi(2) + 5.2f64.powi(2)).sqrt()).abs() < 1e-12);
        assert_eq!(score(&m, "e0", "r9", "e0"), Err(EmbedError::UnknownSymbol("r9".into())));
    }

    #[test]
    fn constructed_optimum_ranks_first() {
        let m = model_with(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![-9.0, 9.0], vec![9.0, -9.0]],
            vec![vec![1.0, 0.0]],
        );
        assert_eq!(raw_rank(&m, (0, 0, 1)), 1);
        let s = evaluate_mean_rank(&m, &[(0, 0, 1), (0, 0, 2)]);
        assert_eq!(s.n, 2);
        assert!(s.mean_rank >= 1.0 && s.mean_rank <= 4.0);
        assert_eq!(evaluate_mean_rank(&m, &[]).n, 0);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let m = model_with(vec![vec![0.0]; 4], vec![vec![0.0]]);
        let ranks: Vec<usize> = (0..4).map(|t| raw_rank(&m, (0, 0, t))).collect();
        assert_eq!(ranks, vec![1, 2, 3, 4]);
    }

    #[test]
    fn emb_round_trip() {
        let m = train(&toy1_index(), &Hyperparams::default()).unwrap();
        let text = export_emb(&m);
        assert!(text.starts_with("emb v1 dim=8 entities=4 relations=1 seed=42\n"));
        let back = import_emb(&text).unwrap();
        assert_eq!(back.entity_vectors, m.entity_vectors);
        assert_eq!(back.relation_vectors, m.relation_vectors);
        assert_eq!(back.entities, m.entities);
        assert_eq!(export_emb(&back), text);

        let tiny = model_with(vec![vec![0.1, -0.0]], vec![vec![1.0, 1e-300]]);
        let text = export_emb(&tiny);
        assert_eq!(text.lines().count(), 3);
        let back = import_emb(&text).unwrap();
        assert_eq!(back.entity_vectors[0][1].to_bits(), (-0.0f64).to_bits());
        assert_eq!(back.relation_vectors, tiny.relation_vectors);
    }

    #[test]
    fn emb_rejects_garbage() {
        assert!(import_emb("").is_err());
        assert!(import_emb("emb v2 dim=1 entities=0 relations=0 seed=0\n").is_err());
        assert!(import_emb("emb v1 dim=2 entities=1 relations=0 seed=0\nE\tx\t1\n").is_err());
        assert!(import_emb("emb v1 dim=1 entities=2 relations=0 seed=0\nE\tx\t1\n").is_err());
        assert!(import_emb("emb v1 dim=1 entities=1 relations=0 seed=0\nQ\tx\t1\n").is_err());
        assert!(import_emb("emb v1 dim=1 entities=1 relations=0 seed=0\nE\tx\tfoo\n").is_err());
    }

    #[test]
    fn loss_is_a_hinge() {
        let a = [0.0, 0.0];
        let b = [3.0, 0.0];
        // positive at distance 0, negative at distance 3 > margin
        let x = LossInput { pos: [&a, &a, &a], neg: [&a, &a, &b], margin: 1.0 };
        assert_eq!(margin_loss(&x), 0.0);
        assert!(margin_loss_gradient(&x).pos.iter().flatten().all(|g| *g == 0.0));
        let x = LossInput { pos: [&a, &a, &b], neg: [&a, &a, &a], margin: 1.0 };
        assert_eq!(margin_loss(&x), 4.0);
    }
}
