//! The formal context of a schema: entity types, properties, and the
//! incidence relation saying which entity types a property is associated to.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::rdf::{serialize, vocab, Graph, RdfFormat, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("schema has no entity types and no properties")]
    EmptySchema,
    #[error("incidence pair ({etype}, {property}) is outside etypes x properties")]
    InvalidIncidence { etype: String, property: String },
    #[error("invalid extraction config: {0}")]
    InvalidConfig(String),
}

/// Rules deciding which IRIs count as entity types and properties, and which
/// statements associate them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractionConfig {
    pub class_markers: BTreeSet<String>,
    pub property_markers: BTreeSet<String>,
    pub use_range_as_association: bool,
    pub inherit_via_subclass: bool,
    pub union_domain_expansion: bool,
    /// Predicates read as "property has domain class". Schema.org-style
    /// vocabularies need `schema:domainIncludes` here.
    pub domain_predicates: BTreeSet<String>,
    pub range_predicates: BTreeSet<String>,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        let set = |items: &[&str]| items.iter().map(|s| s.to_string()).collect();
        ExtractionConfig {
            class_markers: set(&[vocab::RDFS_CLASS, vocab::OWL_CLASS]),
            property_markers: set(&[
                vocab::RDF_PROPERTY,
                vocab::OWL_OBJECT_PROPERTY,
                vocab::OWL_DATATYPE_PROPERTY,
                vocab::OWL_ANNOTATION_PROPERTY,
            ]),
            use_range_as_association: false,
            inherit_via_subclass: false,
            union_domain_expansion: true,
            domain_predicates: set(&[vocab::RDFS_DOMAIN]),
            range_predicates: set(&[vocab::RDFS_RANGE]),
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<(), SchemaError> {
        if self.class_markers.is_empty() {
            return Err(SchemaError::InvalidConfig("class_markers is empty".into()));
        }
        if self.property_markers.is_empty() {
            return Err(SchemaError::InvalidConfig("property_markers is empty".into()));
        }
        if self.domain_predicates.is_empty() {
            return Err(SchemaError::InvalidConfig("domain_predicates is empty".into()));
        }
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    pub config_hash: String,
}

/// `K = <E, P, I>` with `I ⊆ E × P`. Sets iterate in lexicographic IRI order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaContext {
    etypes: BTreeSet<String>,
    properties: BTreeSet<String>,
    incidence: BTreeSet<(String, String)>,
    domains: BTreeMap<String, BTreeSet<String>>,
    props_of: BTreeMap<String, BTreeSet<String>>,
    provenance: Provenance,
}

static EMPTY: BTreeSet<String> = BTreeSet::new();

impl SchemaContext {
    pub fn new(
        etypes: impl IntoIterator<Item = String>,
        properties: impl IntoIterator<Item = String>,
        incidence: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, SchemaError> {
        let etypes: BTreeSet<String> = etypes.into_iter().collect();
        let properties: BTreeSet<String> = properties.into_iter().collect();
        let incidence: BTreeSet<(String, String)> = incidence.into_iter().collect();
        if let Some((e, p)) = incidence
            .iter()
            .find(|(e, p)| !etypes.contains(e) || !properties.contains(p))
        {
            return Err(SchemaError::InvalidIncidence {
                etype: e.clone(),
                property: p.clone(),
            });
        }
        Ok(Self::assemble(etypes, properties, incidence, Provenance::default()))
    }

    fn assemble(
        etypes: BTreeSet<String>,
        properties: BTreeSet<String>,
        incidence: BTreeSet<(String, String)>,
        provenance: Provenance,
    ) -> Self {
        let mut domains: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut props_of: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (e, p) in &incidence {
            domains.entry(p.clone()).or_default().insert(e.clone());
            props_of.entry(e.clone()).or_default().insert(p.clone());
        }
        SchemaContext {
            etypes,
            properties,
            incidence,
            domains,
            props_of,
            provenance,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn etypes(&self) -> &BTreeSet<String> {
        &self.etypes
    }

    pub fn properties(&self) -> &BTreeSet<String> {
        &self.properties
    }

    pub fn incidence(&self) -> &BTreeSet<(String, String)> {
        &self.incidence
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn has_etype(&self, e: &str) -> bool {
        self.etypes.contains(e)
    }

    pub fn has_property(&self, p: &str) -> bool {
        self.properties.contains(p)
    }

    /// `dom(p)`: entity types associated to `p`.
    pub fn dom(&self, p: &str) -> &BTreeSet<String> {
        self.domains.get(p).unwrap_or(&EMPTY)
    }

    /// `prop(e)`: properties associated to `e`.
    pub fn prop(&self, e: &str) -> &BTreeSet<String> {
        self.props_of.get(e).unwrap_or(&EMPTY)
    }

    pub fn is_associated(&self, e: &str, p: &str) -> bool {
        self.dom(p).contains(e)
    }

    /// Number of properties with a non-empty domain.
    pub fn properties_with_domain(&self) -> usize {
        self.domains.len()
    }

    /// Restricts the property set. Filter IRIs missing from the schema are
    /// reported back but do not fail the operation.
    pub fn filter_predicates(&self, filter: &PredicateFilter) -> FilterOutcome {
        let (keep, requested): (BTreeSet<String>, &BTreeSet<String>) = match filter {
            PredicateFilter::Include(set) => (
                self.properties.intersection(set).cloned().collect(),
                set,
            ),
            PredicateFilter::Exclude(set) => (self.properties.difference(set).cloned().collect(), set),
        };
        let unknown: Vec<String> = requested
            .iter()
            .filter(|iri| !self.properties.contains(*iri))
            .cloned()
            .collect();
        let incidence = self
            .incidence
            .iter()
            .filter(|(_, p)| keep.contains(p))
            .cloned()
            .collect();
        let schema = Self::assemble(self.etypes.clone(), keep, incidence, self.provenance.clone());
        FilterOutcome { schema, unknown }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredicateFilter {
    Include(BTreeSet<String>),
    Exclude(BTreeSet<String>),
}

#[derive(Debug, Clone)]
pub struct FilterOutcome {
    pub schema: SchemaContext,
    /// Filter IRIs that are not properties of the schema.
    pub unknown: Vec<String>,
}

/// Builds the formal context of `graph` under `config`.
pub fn extract_schema(graph: &Graph, config: &ExtractionConfig) -> Result<SchemaContext, SchemaError> {
    config.validate()?;
    let mut etypes = BTreeSet::new();
    let mut properties = BTreeSet::new();
    let mut incidence = BTreeSet::new();

    for t in graph.triples() {
        let (Some(subject), Some(predicate)) = (t.subject.as_iri(), t.predicate.as_iri()) else {
            continue;
        };
        if predicate == vocab::RDF_TYPE {
            if let Some(marker) = t.object.as_iri() {
                if config.class_markers.contains(marker) {
                    etypes.insert(subject.to_string());
                }
                if config.property_markers.contains(marker) {
                    properties.insert(subject.to_string());
                }
            }
            continue;
        }
        let is_domain = config.domain_predicates.contains(predicate);
        let is_range = config.range_predicates.contains(predicate);
        if !is_domain && !is_range {
            continue;
        }
        properties.insert(subject.to_string());
        if is_domain || config.use_range_as_association {
            for class in resolve_classes(graph, &t.object, config.union_domain_expansion) {
                etypes.insert(class.clone());
                incidence.insert((class, subject.to_string()));
            }
        }
    }

    if config.inherit_via_subclass {
        let subclasses = subclass_index(graph);
        let direct: Vec<(String, String)> = incidence.iter().cloned().collect();
        for (class, property) in direct {
            for sub in descendants(&subclasses, &class) {
                etypes.insert(sub.clone());
                incidence.insert((sub, property.clone()));
            }
        }
    }

    if etypes.is_empty() && properties.is_empty() {
        return Err(SchemaError::EmptySchema);
    }
    let provenance = Provenance {
        source: graph_digest(graph),
        config_hash: config.digest(),
    };
    Ok(SchemaContext::assemble(etypes, properties, incidence, provenance))
}

/// `sha256:<hex>` of the sorted N-Triples serialization.
pub fn graph_digest(graph: &Graph) -> String {
    let nt = serialize(graph, RdfFormat::NTriples);
    format!("sha256:{}", hex::encode(Sha256::digest(nt.as_bytes())))
}

fn resolve_classes(graph: &Graph, node: &Term, expand_unions: bool) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![node.clone()];
    let mut seen = BTreeSet::new();
    while let Some(node) = stack.pop() {
        if !seen.insert(node.clone()) {
            continue;
        }
        match &node {
            Term::Iri(iri) => out.push(iri.clone()),
            Term::BlankNode(_) if expand_unions => {
                for list in graph.objects(&node, vocab::OWL_UNION_OF) {
                    if let Some(members) = graph.collection(list) {
                        stack.extend(members);
                    }
                }
            }
            _ => {}
        }
    }
    out.sort();
    out.dedup();
    out
}

// superclass -> direct IRI subclasses
fn subclass_index(graph: &Graph) -> BTreeMap<String, BTreeSet<String>> {
    let mut index: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for t in graph.match_pattern(None, Some(&Term::iri(vocab::RDFS_SUBCLASS_OF)), None) {
        if let (Some(sub), Some(sup)) = (t.subject.as_iri(), t.object.as_iri()) {
            if sub != sup {
                index.entry(sup.to_string()).or_default().insert(sub.to_string());
            }
        }
    }
    index
}

fn descendants(index: &BTreeMap<String, BTreeSet<String>>, root: &str) -> BTreeSet<String> {
    let mut found = BTreeSet::new();
    let mut queue: VecDeque<&str> = VecDeque::from([root]);
    while let Some(class) = queue.pop_front() {
        for sub in index.get(class).into_iter().flatten() {
            if sub != root && found.insert(sub.clone()) {
                queue.push_back(sub);
            }
        }
    }
    found
}
