//! Dataset and distribution records (DCAT-AP style).

use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::HarvestError;

/// Closed registry of distribution formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Format {
    #[serde(rename = "turtle")]
    Turtle,
    #[serde(rename = "ntriples")]
    NTriples,
    #[serde(rename = "rdfxml")]
    RdfXml,
    #[serde(rename = "jsonld")]
    JsonLd,
    #[serde(rename = "triples-csv")]
    TriplesCsv,
    #[serde(rename = "fca-csv")]
    FcaCsv,
    #[serde(rename = "cue-csv")]
    CueCsv,
    #[serde(rename = "vis-json")]
    VisJson,
    #[serde(rename = "emb")]
    Emb,
}

impl Format {
    pub const ALL: [Format; 9] = [
        Format::Turtle,
        Format::NTriples,
        Format::RdfXml,
        Format::JsonLd,
        Format::TriplesCsv,
        Format::FcaCsv,
        Format::CueCsv,
        Format::VisJson,
        Format::Emb,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Format::Turtle => "turtle",
            Format::NTriples => "ntriples",
            Format::RdfXml => "rdfxml",
            Format::JsonLd => "jsonld",
            Format::TriplesCsv => "triples-csv",
            Format::FcaCsv => "fca-csv",
            Format::CueCsv => "cue-csv",
            Format::VisJson => "vis-json",
            Format::Emb => "emb",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Turtle => "ttl",
            Format::NTriples => "nt",
            Format::RdfXml => "rdf",
            Format::JsonLd => "jsonld",
            Format::TriplesCsv => "triples.csv",
            Format::FcaCsv => "fca.csv",
            Format::CueCsv => "cue.csv",
            Format::VisJson => "vis.json",
            Format::Emb => "emb",
        }
    }

    pub fn from_media_type(media_type: &str) -> Option<Format> {
        let essence = media_type.split(';').next().unwrap_or("").trim().to_ascii_lowercase();
        match essence.as_str() {
            "text/turtle" | "application/x-turtle" => Some(Format::Turtle),
            "application/n-triples" | "text/plain+ntriples" => Some(Format::NTriples),
            "application/rdf+xml" => Some(Format::RdfXml),
            "application/ld+json" => Some(Format::JsonLd),
            _ => None,
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Format {
    type Err = HarvestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let alias = match lower.as_str() {
            "ttl" => "turtle",
            "nt" | "n-triples" => "ntriples",
            "rdf/xml" | "rdf" | "owl" => "rdfxml",
            "json-ld" => "jsonld",
            other => other,
        };
        Format::ALL
            .into_iter()
            .find(|f| f.as_str() == alias)
            .ok_or_else(|| HarvestError::Validation(format!("unknown format {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionStatus {
    Remote,
    Fetched,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub access_url: String,
    pub format: Format,
    pub license: String,
    pub byte_size: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub download_url: Option<String>,
    #[serde(default)]
    pub description: String,
    pub status: DistributionStatus,
    /// `sha256:<hex>` of the stored bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content_hash: Option<String>,
    /// Name under `files/` in the dataset directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file_name: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordProvenance {
    pub catalog: String,
    pub native_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub title: String,
    pub description: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub publisher: String,
    #[serde(default)]
    pub category: String,
    #[serde(default)]
    pub distributions: Vec<DistributionRecord>,
    #[serde(default)]
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub release_date: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub update_date: Option<DateTime<Utc>>,
    #[serde(default)]
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub landing_page: Option<String>,
    #[serde(default)]
    pub provenance: RecordProvenance,
    #[serde(default)]
    pub complete: bool,
}

fn check_url(url: &str, what: &str) -> Result<(), HarvestError> {
    url::Url::parse(url)
        .map(|_| ())
        .map_err(|e| HarvestError::Validation(format!("{what} {url:?}: {e}")))
}

pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && !id.starts_with(['.', '-'])
        && id.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl DistributionRecord {
    pub fn validate(&self) -> Result<(), HarvestError> {
        check_url(&self.access_url, "access_url")?;
        if let Some(u) = &self.download_url {
            check_url(u, "download_url")?;
        }
        if self.status != DistributionStatus::Remote && self.byte_size == 0 {
            return Err(HarvestError::Validation(format!(
                "{:?} distribution {} has byte_size 0",
                self.status, self.access_url
            )));
        }
        if let Some(name) = &self.file_name {
            if !is_valid_id(name) {
                return Err(HarvestError::Validation(format!("bad file name {name:?}")));
            }
        }
        Ok(())
    }
}

impl DatasetRecord {
    pub fn validate(&self) -> Result<(), HarvestError> {
        if !is_valid_id(&self.id) {
            return Err(HarvestError::Validation(format!("bad dataset id {:?}", self.id)));
        }
        if self.title.trim().is_empty() {
            return Err(HarvestError::Validation(format!("dataset {} has no title", self.id)));
        }
        if self.description.trim().is_empty() {
            return Err(HarvestError::Validation(format!("dataset {} has no description", self.id)));
        }
        if self.complete && self.distributions.is_empty() {
            return Err(HarvestError::Validation(format!(
                "dataset {} is marked complete but has no distributions",
                self.id
            )));
        }
        if let Some(u) = &self.landing_page {
            check_url(u, "landing_page")?;
        }
        self.distributions.iter().try_for_each(DistributionRecord::validate)
    }
}

/// Turns an arbitrary identifier into a store-safe slug.
pub fn slug(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    let trimmed = out.trim_matches('-');
    if trimmed.is_empty() {
        "dataset".to_string()
    } else {
        trimmed.chars().take(100).collect()
    }
}

/// Accepts RFC 3339 timestamps and plain `YYYY-MM-DD` dates.
pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc())
}

/// Outcome counters of one sync run.
///
/// `checked = added + updated + unchanged + skipped_license + skipped_format + |failed|`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyncReport {
    pub source: String,
    pub checked: usize,
    pub added: usize,
    pub updated: usize,
    pub unchanged: usize,
    pub skipped_license: usize,
    pub skipped_format: usize,
    pub failed: Vec<(String, String)>,
}

impl SyncReport {
    pub fn is_balanced(&self) -> bool {
        self.checked
            == self.added + self.updated + self.unchanged + self.skipped_license + self.skipped_format + self.failed.len()
    }
}
