use std::collections::{BTreeSet, HashMap};
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};

use crate::catalog::{fetch_catalog_index, RemoteDescriptor, SourceConfig};
use crate::fetch::{fetch_distribution, Fetched, DEFAULT_SIZE_CAP};
use crate::license::LicensePolicy;
use crate::model::{slug, DatasetRecord, DistributionRecord, DistributionStatus, Format, RecordProvenance, SyncReport};
use crate::store::{Store, UpsertOutcome};
use crate::transport::Transport;
use crate::HarvestError;

#[derive(Debug, Clone)]
pub struct SyncOptions {
    pub policy: LicensePolicy,
    /// Concurrent distribution fetches.
    pub parallelism: usize,
    /// Minimum gap between two requests to the same host.
    pub politeness: Duration,
    pub size_cap: u64,
}

impl Default for SyncOptions {
    fn default() -> Self {
        SyncOptions {
            policy: LicensePolicy::default(),
            parallelism: 4,
            politeness: Duration::from_millis(500),
            size_cap: DEFAULT_SIZE_CAP,
        }
    }
}

enum Plan {
    Fetch { id: String, url: String },
    SkipLicense,
    SkipFormat,
    Fail { id: String, error: String },
}

fn dataset_id(source: &SourceConfig, native_id: &str) -> String {
    format!("{}-{}", source.id, slug(native_id))
}

fn plan(source: &SourceConfig, options: &SyncOptions, d: &RemoteDescriptor, seen: &mut BTreeSet<String>) -> Plan {
    let id = dataset_id(source, &d.native_id);
    if !seen.insert(id.clone()) {
        return Plan::Fail {
            id,
            error: format!("duplicate dataset id for native id {:?}", d.native_id),
        };
    }
    // license first: rejected datasets are never fetched
    if !options.policy.accepts(&d.license) {
        return Plan::SkipLicense;
    }
    if let Some(f) = d.declared_format {
        if !source.format_filter.contains(&f) {
            return Plan::SkipFormat;
        }
    }
    match &d.file_url {
        Some(url) => Plan::Fetch { id, url: url.clone() },
        None => Plan::Fail {
            id,
            error: "no distribution file URL in the index".into(),
        },
    }
}

fn host_of(url: &str) -> String {
    url::Url::parse(url)
        .ok()
        .and_then(|u| u.host_str().map(str::to_string))
        .unwrap_or_default()
}

/// Fetches `urls` with at most `parallelism` requests in flight and at least
/// `politeness` between two requests to the same host. Results come back in
/// input order.
fn fetch_all(transport: &dyn Transport, urls: &[&str], options: &SyncOptions) -> Vec<Result<Fetched, HarvestError>> {
    let next = Mutex::new(0usize);
    let slots: Mutex<HashMap<String, Instant>> = Mutex::new(HashMap::new());
    let results: Vec<Mutex<Option<Result<Fetched, HarvestError>>>> = urls.iter().map(|_| Mutex::new(None)).collect();
    let workers = options.parallelism.max(1).min(urls.len());
    thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = {
                    let mut n = next.lock().expect("work queue");
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(url) = urls.get(i) else { break };
                // reserve the next free slot for this host, then wait for it
                let start = {
                    let mut slots = slots.lock().expect("host slots");
                    let now = Instant::now();
                    let at = slots.get(&host_of(url)).map_or(now, |last| (*last + options.politeness).max(now));
                    slots.insert(host_of(url), at);
                    at
                };
                thread::sleep(start.saturating_duration_since(Instant::now()));
                log::debug!("fetching {url}");
                let r = fetch_distribution(transport, url, options.size_cap);
                *results[i].lock().expect("result slot") = Some(r);
            });
        }
    });
    results
        .into_iter()
        .map(|m| m.into_inner().expect("result slot").expect("every url fetched"))
        .collect()
}

fn build_record(source: &SourceConfig, id: &str, d: &RemoteDescriptor, url: &str, format: Format, file_name: &str, byte_size: u64) -> DatasetRecord {
    let landing_page = d.landing_page.clone().filter(|u| url::Url::parse(u).is_ok());
    DatasetRecord {
        id: id.to_string(),
        title: if d.title.is_empty() { d.native_id.clone() } else { d.title.clone() },
        description: d.description.clone(),
        keywords: d.keywords.clone(),
        publisher: d.publisher.clone(),
        category: String::new(),
        distributions: vec![DistributionRecord {
            access_url: url.to_string(),
            format,
            license: d.license.clone(),
            byte_size,
            download_url: Some(url.to_string()),
            description: String::new(),
            status: DistributionStatus::Fetched,
            content_hash: None,
            file_name: Some(file_name.to_string()),
        }],
        version: d.version.clone().unwrap_or_default(),
        release_date: d.release_date,
        update_date: d.last_modified,
        language: d.language.clone(),
        landing_page,
        provenance: RecordProvenance {
            catalog: source.id.clone(),
            native_id: d.native_id.clone(),
        },
        complete: true,
    }
}

/// One sync run: index → license and format filters → fetch → upsert.
/// Only an unreachable or unparseable index is an error; every per-dataset
/// problem lands in `failed`.
pub fn sync(source: &SourceConfig, transport: &dyn Transport, store: &Store, options: &SyncOptions) -> Result<SyncReport, HarvestError> {
    source.validate()?;
    let descriptors = fetch_catalog_index(transport, source)?;
    let mut report = SyncReport {
        source: source.id.clone(),
        checked: descriptors.len(),
        ..SyncReport::default()
    };

    let mut seen = BTreeSet::new();
    let plans: Vec<Plan> = descriptors.iter().map(|d| plan(source, options, d, &mut seen)).collect();
    let urls: Vec<&str> = plans
        .iter()
        .filter_map(|p| match p {
            Plan::Fetch { url, .. } => Some(url.as_str()),
            _ => None,
        })
        .collect();
    let mut fetched = fetch_all(transport, &urls, options).into_iter();

    for (d, p) in descriptors.iter().zip(plans) {
        let (id, url) = match p {
            Plan::SkipLicense => {
                log::info!("{}: license {:?} not accepted", d.native_id, d.license);
                report.skipped_license += 1;
                continue;
            }
            Plan::SkipFormat => {
                report.skipped_format += 1;
                continue;
            }
            Plan::Fail { id, error } => {
                report.failed.push((id, error));
                continue;
            }
            Plan::Fetch { id, url } => (id, url),
        };
        let body = match fetched.next().expect("one fetch per plan") {
            Ok(f) => f,
            Err(e) => {
                log::warn!("{id}: {e}");
                report.failed.push((id, e.to_string()));
                continue;
            }
        };
        let Some(format) = body.format.or(d.declared_format).filter(|f| source.format_filter.contains(f)) else {
            report.skipped_format += 1;
            continue;
        };
        let file_name = format!("{}.{}", slug(&d.native_id), format.extension());
        let record = build_record(source, &id, d, &url, format, &file_name, body.byte_size());
        match store.upsert(record, &[(file_name, body.bytes)]) {
            Ok((_, UpsertOutcome::Created)) => report.added += 1,
            Ok((_, UpsertOutcome::Updated)) => report.updated += 1,
            Ok((_, UpsertOutcome::Unchanged)) => report.unchanged += 1,
            Err(e) => {
                log::warn!("{id}: {e}");
                report.failed.push((id, e.to_string()));
            }
        }
    }
    debug_assert!(report.is_balanced());
    Ok(report)
}

/// Runs [`sync`] unless the source was synced less than `interval_hours`
/// before `now`; records the sync time on success.
pub fn sync_if_due(
    source: &SourceConfig,
    transport: &dyn Transport,
    store: &Store,
    options: &SyncOptions,
    now: DateTime<Utc>,
) -> Result<Option<SyncReport>, HarvestError> {
    let interval = chrono::Duration::hours(source.interval_hours.min(i64::MAX as u64 / 3600) as i64);
    if let Some(last) = store.last_sync(&source.id)? {
        if now < last + interval {
            log::info!("{}: last synced {last}, not due", source.id);
            return Ok(None);
        }
    }
    let report = sync(source, transport, store, options)?;
    store.record_sync(&source.id, now)?;
    Ok(Some(report))
}
