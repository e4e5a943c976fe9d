use sha2::{Digest, Sha256};

use crate::model::Format;
use crate::transport::{Transport, TransportError};
use crate::HarvestError;

pub const DEFAULT_SIZE_CAP: u64 = 64 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fetched {
    pub bytes: Vec<u8>,
    /// None when neither the content nor the media type is recognised.
    pub format: Option<Format>,
    pub content_hash: String,
}

impl Fetched {
    pub fn byte_size(&self) -> u64 {
        self.bytes.len() as u64
    }
}

pub fn content_hash(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

pub fn fetch_distribution(transport: &dyn Transport, url: &str, size_cap: u64) -> Result<Fetched, HarvestError> {
    url::Url::parse(url).map_err(|e| HarvestError::Validation(format!("distribution url {url:?}: {e}")))?;
    let resp = transport.get(url, size_cap).map_err(|e| match e {
        TransportError::TooLarge { url, limit } => HarvestError::SizeLimit { url, limit },
        other => HarvestError::Transport(other),
    })?;
    let format = sniff_format(&resp.body, resp.content_type.as_deref());
    Ok(Fetched {
        content_hash: content_hash(&resp.body),
        bytes: resp.body,
        format,
    })
}

fn looks_like_ntriples_line(line: &str) -> bool {
    (line.starts_with('<') || line.starts_with("_:"))
        && line.ends_with('.')
        && !line.ends_with("..")
        && line.split_whitespace().count() >= 4
}

fn is_directive(line: &str) -> bool {
    let lower = line.get(..7).unwrap_or(line).to_ascii_lowercase();
    line.starts_with("@prefix") || line.starts_with("@base") || lower.starts_with("prefix ") || lower.starts_with("base ")
}

/// Content sniffing. Turtle directives and the N-Triples line shape decide;
/// the media type breaks ties (an N-Triples document is also valid Turtle).
pub fn sniff_format(body: &[u8], media_type: Option<&str>) -> Option<Format> {
    let declared = media_type.and_then(Format::from_media_type);
    let text = String::from_utf8_lossy(body);
    let text = text.trim_start_matches('\u{feff}').trim_start();
    if text.starts_with("<?xml") || text.starts_with("<rdf:RDF") {
        return Some(Format::RdfXml);
    }
    if text.starts_with('{') {
        return Some(Format::JsonLd);
    }
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect();
    if lines.is_empty() {
        return declared;
    }
    if lines.iter().any(|l| is_directive(l)) {
        return Some(Format::Turtle);
    }
    if lines.iter().all(|l| looks_like_ntriples_line(l)) {
        return match declared {
            Some(Format::Turtle) => Some(Format::Turtle),
            _ => Some(Format::NTriples),
        };
    }
    declared
}
