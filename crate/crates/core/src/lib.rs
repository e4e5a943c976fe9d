//! Parsing, analysis and transformation of knowledge graph schemas.
//!
//! The pipeline runs from an RDF [`rdf::Graph`] to a [`schema::SchemaContext`]
//! (entity types, properties and their incidence), and from there to cue
//! validity reports, formal-context matrices, property-intersection tables and
//! translational embeddings.

pub mod rdf;

pub mod cue;
pub mod embed;
pub mod fca;
pub mod intersections;
pub mod schema;
