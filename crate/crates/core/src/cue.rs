//! Cue validity metrics.
//!
//! * `cue_p(p, e) = PoE(p, e) / |dom(p)|`
//! * `cue_e(e) = Σ_{p ∈ prop(e)} cue_p(p, e)`
//! * `cue_er(e) = cue_e(e) / |prop(e)|`
//! * `cue_k(K) = Σ_e cue_e(e)`
//! * `cue_kr(K) = |prop(K)| / Σ_e |prop(e)|`
//!
//! Sums are correctly rounded (see [`exact_sum`]) so results do not depend on
//! summation order, and a property's `cue_p` column sums to exactly 1.

use std::cmp::Ordering;

use serde::Serialize;
use thiserror::Error;

use crate::schema::SchemaContext;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CueError {
    #[error("unknown entity type <{0}>")]
    UnknownEtype(String),
    #[error("unknown property <{0}>")]
    UnknownProperty(String),
    #[error("cue_kr is undefined: no entity type has any property")]
    DegenerateSchema,
}

fn check_etype(schema: &SchemaContext, e: &str) -> Result<(), CueError> {
    if schema.has_etype(e) {
        Ok(())
    } else {
        Err(CueError::UnknownEtype(e.to_string()))
    }
}

/// Cue validity of property `p` for entity type `e`.
pub fn cue_p(schema: &SchemaContext, p: &str, e: &str) -> Result<f64, CueError> {
    if !schema.has_property(p) {
        return Err(CueError::UnknownProperty(p.to_string()));
    }
    check_etype(schema, e)?;
    Ok(cue_p_unchecked(schema, p, e))
}

fn cue_p_unchecked(schema: &SchemaContext, p: &str, e: &str) -> f64 {
    let dom = schema.dom(p);
    if dom.contains(e) {
        1.0 / dom.len() as f64
    } else {
        0.0
    }
}

pub fn cue_e(schema: &SchemaContext, e: &str) -> Result<f64, CueError> {
    check_etype(schema, e)?;
    Ok(cue_e_unchecked(schema, e))
}

fn cue_e_unchecked(schema: &SchemaContext, e: &str) -> f64 {
    exact_sum(schema.prop(e).iter().map(|p| cue_p_unchecked(schema, p, e)))
}

/// `cue_e(e) / |prop(e)|`, or 0 for an entity type without properties.
pub fn cue_er(schema: &SchemaContext, e: &str) -> Result<f64, CueError> {
    check_etype(schema, e)?;
    Ok(ratio(cue_e_unchecked(schema, e), schema.prop(e).len()))
}

fn ratio(cue_e: f64, n_props: usize) -> f64 {
    if n_props == 0 {
        0.0
    } else {
        cue_e / n_props as f64
    }
}

pub fn cue_k(schema: &SchemaContext) -> f64 {
    exact_sum(schema.etypes().iter().map(|e| cue_e_unchecked(schema, e)))
}

pub fn cue_kr(schema: &SchemaContext) -> Result<f64, CueError> {
    let denominator: usize = schema.etypes().iter().map(|e| schema.prop(e).len()).sum();
    if denominator == 0 {
        return Err(CueError::DegenerateSchema);
    }
    Ok(schema.properties_with_domain() as f64 / denominator as f64)
}

/// Sum of `cue_p(p, e)` over every entity type.
pub fn column_sum(schema: &SchemaContext, p: &str) -> Result<f64, CueError> {
    if !schema.has_property(p) {
        return Err(CueError::UnknownProperty(p.to_string()));
    }
    Ok(exact_sum(schema.etypes().iter().map(|e| cue_p_unchecked(schema, p, e))))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EtypeCue {
    pub etype: String,
    pub cue_e: f64,
    pub cue_er: f64,
    pub n_props: usize,
    /// False when the entity type has no properties and `cue_er` was set to 0.
    pub cue_er_defined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemaCue {
    pub cue_k: f64,
    pub cue_kr: Option<f64>,
    pub n_etypes: usize,
    pub n_props_total: usize,
    pub n_props_with_domain: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CueReport {
    /// Sorted by descending `cue_e`, ties by IRI.
    pub per_etype: Vec<EtypeCue>,
    pub schema_level: SchemaCue,
}

pub fn cue_report(schema: &SchemaContext) -> CueReport {
    let mut per_etype: Vec<EtypeCue> = schema
        .etypes()
        .iter()
        .map(|e| {
            let n_props = schema.prop(e).len();
            let cue_e = cue_e_unchecked(schema, e);
            EtypeCue {
                etype: e.clone(),
                cue_e,
                cue_er: ratio(cue_e, n_props),
                n_props,
                cue_er_defined: n_props > 0,
            }
        })
        .collect();
    per_etype.sort_by(|a, b| {
        b.cue_e
            .partial_cmp(&a.cue_e)
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.etype.cmp(&b.etype))
    });
    let cue_k = exact_sum(per_etype.iter().map(|r| r.cue_e));
    CueReport {
        per_etype,
        schema_level: SchemaCue {
            cue_k,
            cue_kr: cue_kr(schema).ok(),
            n_etypes: schema.etypes().len(),
            n_props_total: schema.properties().len(),
            n_props_with_domain: schema.properties_with_domain(),
        },
    }
}

impl CueReport {
    pub fn row(&self, etype: &str) -> Option<&EtypeCue> {
        self.per_etype.iter().find(|r| r.etype == etype)
    }
}

/// Correctly rounded floating-point sum (Shewchuk's partials algorithm, as
/// in Python's `math.fsum`). The result is independent of input order.
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    // Round the partials (non-overlapping, increasing magnitude) to one value.
    let Some(mut hi) = partials.pop() else {
        return 0.0;
    };
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Half-way case: the remaining partials decide the rounding direction.
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}
