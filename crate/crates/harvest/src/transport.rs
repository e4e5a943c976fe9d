//! Pluggable HTTP access: a live client and a recorded-fixture player.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use thiserror::Error;

pub const USER_AGENT: &str = concat!("schemaforge-harvest/", env!("CARGO_PKG_VERSION"));
pub const MAX_REDIRECTS: u32 = 5;
pub const TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("{url}: {message}")]
    Unreachable { url: String, message: String },
    #[error("{url}: HTTP {status}")]
    Status { url: String, status: u16 },
    #[error("{url}: body exceeds {limit} bytes")]
    TooLarge { url: String, limit: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub status: u16,
    pub content_type: Option<String>,
    pub body: Vec<u8>,
}

pub trait Transport: Send + Sync {
    /// GET `url`, reading at most `limit` body bytes. Statuses ≥ 400 are errors.
    fn get(&self, url: &str, limit: u64) -> Result<Response, TransportError>;
}

pub struct HttpTransport {
    agent: ureq::Agent,
}

impl Default for HttpTransport {
    fn default() -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(TIMEOUT))
            .max_redirects(MAX_REDIRECTS)
            .user_agent(USER_AGENT)
            .http_status_as_error(false)
            .build();
        HttpTransport {
            agent: ureq::Agent::new_with_config(config),
        }
    }
}

impl Transport for HttpTransport {
    fn get(&self, url: &str, limit: u64) -> Result<Response, TransportError> {
        let unreachable = |e: ureq::Error| TransportError::Unreachable {
            url: url.to_string(),
            message: e.to_string(),
        };
        let mut resp = self.agent.get(url).call().map_err(unreachable)?;
        let status = resp.status().as_u16();
        if status >= 400 {
            return Err(TransportError::Status {
                url: url.to_string(),
                status,
            });
        }
        let content_type = resp
            .headers()
            .get("content-type")
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = resp
            .body_mut()
            .with_config()
            .limit(limit)
            .read_to_vec()
            .map_err(|e| match e {
                ureq::Error::BodyExceedsLimit(_) => TransportError::TooLarge {
                    url: url.to_string(),
                    limit,
                },
                other => unreachable(other),
            })?;
        Ok(Response {
            status,
            content_type,
            body,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    #[serde(default = "ok_status")]
    status: u16,
    #[serde(default)]
    content_type: Option<String>,
    #[serde(default)]
    file: Option<PathBuf>,
    #[serde(default)]
    body: Option<String>,
}

fn ok_status() -> u16 {
    200
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    responses: BTreeMap<String, ManifestEntry>,
}

/// Plays back recorded responses keyed by URL. Unknown URLs are unreachable.
#[derive(Debug, Default)]
pub struct FixtureTransport {
    responses: BTreeMap<String, Response>,
    requests: Mutex<Vec<String>>,
}

impl FixtureTransport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a manifest of the form
    /// `{"responses": {"<url>": {"status": 200, "content_type": "...", "file": "rel/path"}}}`;
    /// `body` may be given inline instead of `file`. Paths are relative to the
    /// manifest's directory.
    pub fn from_manifest(path: &Path) -> Result<Self, crate::HarvestError> {
        let text = crate::read_file(path)?;
        let manifest: Manifest = serde_json::from_slice(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let mut t = FixtureTransport::new();
        for (url, entry) in manifest.responses {
            let body = match (entry.file, entry.body) {
                (Some(f), None) => crate::read_file(&dir.join(f))?,
                (None, Some(b)) => b.into_bytes(),
                (None, None) => Vec::new(),
                (Some(_), Some(_)) => {
                    return Err(crate::HarvestError::Validation(format!(
                        "fixture {url}: give either file or body"
                    )))
                }
            };
            t.insert(
                url,
                Response {
                    status: entry.status,
                    content_type: entry.content_type,
                    body,
                },
            );
        }
        Ok(t)
    }

    pub fn insert(&mut self, url: impl Into<String>, response: Response) {
        self.responses.insert(url.into(), response);
    }

    pub fn insert_body(&mut self, url: impl Into<String>, content_type: Option<&str>, body: impl Into<Vec<u8>>) {
        self.insert(
            url,
            Response {
                status: 200,
                content_type: content_type.map(str::to_string),
                body: body.into(),
            },
        );
    }

    /// URLs requested so far, in order.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("request log").clone()
    }
}

impl Transport for FixtureTransport {
    fn get(&self, url: &str, limit: u64) -> Result<Response, TransportError> {
        self.requests.lock().expect("request log").push(url.to_string());
        let r = self.responses.get(url).ok_or_else(|| TransportError::Unreachable {
            url: url.to_string(),
            message: "no recorded response".into(),
        })?;
        if r.status >= 400 {
            return Err(TransportError::Status {
                url: url.to_string(),
                status: r.status,
            });
        }
        if r.body.len() as u64 > limit {
            return Err(TransportError::TooLarge {
                url: url.to_string(),
                limit,
            });
        }
        Ok(r.clone())
    }
}
