//! Harvests vocabularies from source catalogs into a local, versioned
//! dataset/distribution store.
//!
//! All network access goes through [`Transport`]; [`FixtureTransport`] plays
//! back recorded responses so nothing here needs a live network in tests.

use std::path::{Path, PathBuf};

use thiserror::Error;

pub mod catalog;
pub mod fetch;
pub mod license;
pub mod model;
pub mod search;
pub mod store;
pub mod sync;
pub mod transport;

pub use catalog::{fetch_catalog_index, parse_index, AdapterKind, RemoteDescriptor, SourceConfig};
pub use fetch::{fetch_distribution, sniff_format, Fetched, DEFAULT_SIZE_CAP};
pub use license::{canonical_license_id, LicenseDecision, LicensePolicy, DEFAULT_LICENSES};
pub use model::{DatasetRecord, DistributionRecord, DistributionStatus, Format, RecordProvenance, SyncReport};
pub use search::search_local;
pub use store::{Store, StoredDataset, UpsertOutcome};
pub use sync::{sync, sync_if_due, SyncOptions};
pub use transport::{FixtureTransport, HttpTransport, Response, Transport, TransportError};

#[derive(Debug, Error)]
pub enum HarvestError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("catalog index: {0}")]
    Adapter(String),
    #[error("{url}: body exceeds the {limit}-byte cap")]
    SizeLimit { url: String, limit: u64 },
    #[error("invalid record: {0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Internal(String),
}

impl HarvestError {
    /// True for failures caused by the network or the remote side.
    pub fn is_network(&self) -> bool {
        matches!(self, HarvestError::Transport(_) | HarvestError::SizeLimit { .. })
    }
}

pub(crate) fn io_err(path: &Path, source: std::io::Error) -> HarvestError {
    HarvestError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, HarvestError> {
    std::fs::read(path).map_err(|e| io_err(path, e))
}
