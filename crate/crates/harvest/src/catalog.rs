//! Source catalog configuration and index adapters.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::license::canonical_license_id;
use crate::model::{parse_timestamp, Format};
use crate::transport::Transport;
use crate::HarvestError;

/// Index documents are small; anything larger is refused.
pub const INDEX_SIZE_LIMIT: u64 = 16 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdapterKind {
    /// A JSON array of LOV-style vocabulary entries (`prefix`, `uri`,
    /// `titles`, `descriptions`, `tags`, `versions[].fileURL`, ...).
    Lov,
    /// A JSON array of flat entries (`id`, `title`, `file_url`, `license`, ...).
    Simple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub id: String,
    pub kind: AdapterKind,
    pub index_url: String,
    #[serde(default = "default_formats")]
    pub format_filter: Vec<Format>,
    #[serde(default = "default_interval")]
    pub interval_hours: u64,
}

fn default_formats() -> Vec<Format> {
    vec![Format::Turtle, Format::NTriples]
}

fn default_interval() -> u64 {
    24
}

impl SourceConfig {
    pub fn from_json(text: &str) -> Result<Self, HarvestError> {
        let cfg: SourceConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarvestError> {
        if crate::model::slug(&self.id) != self.id {
            return Err(HarvestError::Validation(format!(
                "source id {:?} must be a lowercase slug",
                self.id
            )));
        }
        url::Url::parse(&self.index_url)
            .map_err(|e| HarvestError::Validation(format!("index_url {:?}: {e}", self.index_url)))?;
        Ok(())
    }
}

/// One entry of a catalog index, before anything is fetched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RemoteDescriptor {
    pub native_id: String,
    pub title: String,
    pub description: String,
    pub keywords: Vec<String>,
    pub publisher: String,
    pub language: String,
    pub landing_page: Option<String>,
    pub version: Option<String>,
    pub release_date: Option<DateTime<Utc>>,
    pub last_modified: Option<DateTime<Utc>>,
    pub file_url: Option<String>,
    pub declared_format: Option<Format>,
    /// Canonicalised license id; empty when undeclared.
    pub license: String,
}

pub fn fetch_catalog_index(transport: &dyn Transport, source: &SourceConfig) -> Result<Vec<RemoteDescriptor>, HarvestError> {
    let resp = transport.get(&source.index_url, INDEX_SIZE_LIMIT)?;
    parse_index(source.kind, &resp.body)
}

pub fn parse_index(kind: AdapterKind, body: &[u8]) -> Result<Vec<RemoteDescriptor>, HarvestError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Ok(Vec::new());
    }
    let doc: Value = serde_json::from_slice(body).map_err(|e| HarvestError::Adapter(format!("index is not JSON: {e}")))?;
    let entries = doc
        .as_array()
        .ok_or_else(|| HarvestError::Adapter("index must be a JSON array".into()))?;
    entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let entry = e
                .as_object()
                .ok_or_else(|| HarvestError::Adapter(format!("entry {i} is not an object")))?;
            match kind {
                AdapterKind::Lov => lov_entry(entry),
                AdapterKind::Simple => simple_entry(entry),
            }
            .map_err(|m| HarvestError::Adapter(format!("entry {i}: {m}")))
        })
        .collect()
}

type Object = serde_json::Map<String, Value>;

fn text(entry: &Object, key: &str) -> Option<String> {
    entry.get(key).and_then(Value::as_str).map(|s| s.trim().to_string())
}

fn strings(entry: &Object, key: &str) -> Vec<String> {
    match entry.get(key) {
        Some(Value::Array(items)) => items.iter().filter_map(Value::as_str).map(str::to_string).collect(),
        Some(Value::String(s)) => s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect(),
        _ => Vec::new(),
    }
}

// [{"value": ..., "lang": ...}] → the English value, else the first one.
fn localized(entry: &Object, key: &str) -> String {
    let Some(Value::Array(items)) = entry.get(key) else {
        return text(entry, key).unwrap_or_default();
    };
    let pick = |want: Option<&str>| {
        items.iter().find_map(|v| {
            let lang = v.get("lang").and_then(Value::as_str);
            let value = v.get("value").and_then(Value::as_str)?;
            (want.is_none() || lang == want).then(|| value.trim().to_string())
        })
    };
    pick(Some("en")).or_else(|| pick(None)).unwrap_or_default()
}

fn lov_entry(entry: &Object) -> Result<RemoteDescriptor, String> {
    let native_id = text(entry, "prefix")
        .or_else(|| text(entry, "uri"))
        .ok_or("missing prefix and uri")?;
    let versions = match entry.get("versions") {
        Some(Value::Array(v)) => v.as_slice(),
        _ => &[],
    };
    // latest issued version wins
    let latest = versions
        .iter()
        .filter_map(|v| {
            let issued = v.get("issued").and_then(Value::as_str).and_then(parse_timestamp)?;
            Some((issued, v))
        })
        .max_by_key(|(issued, _)| *issued);
    let (version, release, file_url) = match latest {
        Some((issued, v)) => (
            v.get("name").and_then(Value::as_str).map(str::to_string),
            Some(issued),
            v.get("fileURL").and_then(Value::as_str).map(str::to_string),
        ),
        None => (None, None, None),
    };
    Ok(RemoteDescriptor {
        native_id,
        title: localized(entry, "titles"),
        description: localized(entry, "descriptions"),
        keywords: strings(entry, "tags"),
        publisher: text(entry, "publisher").unwrap_or_default(),
        language: strings(entry, "languages").into_iter().next().unwrap_or_default(),
        landing_page: text(entry, "homepage").or_else(|| text(entry, "uri")),
        version,
        release_date: text(entry, "issued").as_deref().and_then(parse_timestamp).or(release),
        last_modified: text(entry, "modified").as_deref().and_then(parse_timestamp).or(release),
        file_url,
        declared_format: None,
        license: text(entry, "license").map(|l| canonical_license_id(&l)).unwrap_or_default(),
    })
}

fn simple_entry(entry: &Object) -> Result<RemoteDescriptor, String> {
    let declared_format = match text(entry, "format") {
        Some(f) => Some(f.parse::<Format>().map_err(|e| e.to_string())?),
        None => None,
    };
    Ok(RemoteDescriptor {
        native_id: text(entry, "id").ok_or("missing id")?,
        title: text(entry, "title").unwrap_or_default(),
        description: text(entry, "description").unwrap_or_default(),
        keywords: strings(entry, "keywords"),
        publisher: text(entry, "publisher").unwrap_or_default(),
        language: text(entry, "language").unwrap_or_default(),
        landing_page: text(entry, "landing_page"),
        version: text(entry, "version"),
        release_date: text(entry, "release_date").as_deref().and_then(parse_timestamp),
        last_modified: text(entry, "last_modified").as_deref().and_then(parse_timestamp),
        file_url: text(entry, "file_url"),
        declared_format,
        license: text(entry, "license").map(|l| canonical_license_id(&l)).unwrap_or_default(),
    })
}
