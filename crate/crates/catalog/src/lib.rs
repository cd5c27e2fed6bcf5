//! Elliptic curve metadata (labels, models, optimality, modular degrees,
//! torsion, Kodaira symbols) from a bundled snapshot, a local cache, or the
//! remote catalog.

mod cache;
mod entry;
mod remote;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use chrono::{DateTime, Utc};
use manin_core::certify::{label_order, CensusData, CertifyError, CurveLabel};
use serde::Deserialize;
use thiserror::Error;

pub use cache::{read_cache, write_cache, CacheContents};
pub use entry::{CatalogEntry, Source};
pub use remote::{RemoteClient, DEFAULT_ENDPOINT, ENDPOINT_ENV};

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("no data for conductors up to {bound}: {reason}")]
    Unavailable { bound: u64, reason: String },
    #[error("curve {0} not found")]
    NotFound(String),
    #[error(transparent)]
    Label(#[from] CertifyError),
    #[error("invalid entry {label}: {reason}")]
    Invalid { label: String, reason: String },
    #[error("class {class} has {got} curves, catalog says {expected}")]
    Incomplete {
        class: String,
        got: usize,
        expected: u64,
    },
    #[error("http: {0}")]
    Http(String),
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct FixtureManifest {
    pub max_conductor: u64,
    pub curves: usize,
    pub classes: usize,
    pub snapshot: DateTime<Utc>,
    pub optimality_source: String,
    pub generator: String,
}

#[derive(Deserialize)]
struct FixtureLine {
    label: String,
    conductor: u64,
    ainvs: [i64; 5],
    optimal: bool,
    modular_degree: Option<u64>,
    torsion_order: u64,
    class_size: u64,
    kodaira: BTreeMap<u64, String>,
}

const FIXTURE: &str = include_str!("../fixtures/curves.jsonl");
const MANIFEST: &str = include_str!("../fixtures/manifest.json");

pub fn fixture_manifest() -> &'static FixtureManifest {
    static M: OnceLock<FixtureManifest> = OnceLock::new();
    M.get_or_init(|| serde_json::from_str(MANIFEST).expect("bundled manifest parses"))
}

/// The bundled snapshot, sorted by label.
pub fn fixture_entries() -> &'static [CatalogEntry] {
    static F: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    F.get_or_init(|| {
        let at = fixture_manifest().snapshot;
        let mut v: Vec<CatalogEntry> = FIXTURE
            .lines()
            .map(|l| {
                let f: FixtureLine = serde_json::from_str(l).expect("bundled fixture parses");
                CatalogEntry {
                    label: f.label,
                    conductor: f.conductor,
                    ainvs: f.ainvs,
                    optimal: f.optimal,
                    modular_degree: f.modular_degree,
                    torsion_order: f.torsion_order,
                    class_size: Some(f.class_size),
                    kodaira: Some(f.kodaira),
                    source: Source::Fixture,
                    fetched_at: at,
                }
            })
            .collect();
        v.sort_by(|a, b| label_order(&a.label, &b.label));
        v
    })
}

/// Every class present has as many curves as its recorded class size.
pub fn check_complete(entries: &[CatalogEntry]) -> Result<(), CatalogError> {
    let mut classes: BTreeMap<String, (usize, Option<u64>)> = BTreeMap::new();
    for e in entries {
        let c = classes.entry(e.class_label()?).or_insert((0, e.class_size));
        c.0 += 1;
    }
    for (class, (got, expected)) in classes {
        if let Some(expected) = expected {
            if got as u64 != expected {
                return Err(CatalogError::Incomplete {
                    class,
                    got,
                    expected,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CatalogConfig {
    pub offline: bool,
    pub use_fixture: bool,
    pub cache_path: Option<PathBuf>,
    pub endpoint: String,
    pub min_interval: Duration,
    pub retries: u32,
}

impl Default for CatalogConfig {
    /// Fixture on, network allowed, no cache, endpoint from the environment.
    fn default() -> Self {
        CatalogConfig {
            offline: false,
            use_fixture: true,
            cache_path: None,
            endpoint: std::env::var(ENDPOINT_ENV).unwrap_or_else(|_| DEFAULT_ENDPOINT.to_string()),
            min_interval: Duration::from_secs(1),
            retries: 3,
        }
    }
}

pub struct Catalog {
    config: CatalogConfig,
    remote: OnceLock<RemoteClient>,
    writer: Mutex<()>,
}

impl Catalog {
    pub fn new(config: CatalogConfig) -> Self {
        Catalog {
            config,
            remote: OnceLock::new(),
            writer: Mutex::new(()),
        }
    }

    pub fn config(&self) -> &CatalogConfig {
        &self.config
    }

    fn remote(&self) -> Result<&RemoteClient, CatalogError> {
        if let Some(r) = self.remote.get() {
            return Ok(r);
        }
        let r = RemoteClient::new(
            &self.config.endpoint,
            self.config.min_interval,
            self.config.retries,
        )?;
        Ok(self.remote.get_or_init(|| r))
    }

    fn fixture_covers(&self, bound: u64) -> bool {
        self.config.use_fixture && bound <= fixture_manifest().max_conductor
    }

    /// Merges `entries` into the cache file; later data replaces earlier data.
    fn persist(&self, entries: &[CatalogEntry]) -> Result<(), CatalogError> {
        let Some(path) = &self.config.cache_path else {
            return Ok(());
        };
        let _guard = self.writer.lock().expect("cache writer lock");
        let mut current = read_cache(path)?;
        for e in entries {
            current.entries.insert(e.label.clone(), e.clone());
        }
        write_cache(path, current.entries.values())
    }

    /// Every curve with conductor `<= bound`, sorted by label.
    pub fn fetch_range(&self, bound: u64) -> Result<Vec<CatalogEntry>, CatalogError> {
        if bound == 0 {
            return Ok(Vec::new());
        }
        let entries: Vec<CatalogEntry> = if self.fixture_covers(bound) {
            fixture_entries()
                .iter()
                .filter(|e| e.conductor <= bound)
                .cloned()
                .collect()
        } else if self.config.offline {
            let reason = if self.config.use_fixture {
                format!(
                    "offline and the bundled snapshot stops at {}",
                    fixture_manifest().max_conductor
                )
            } else {
                "offline with the bundled snapshot disabled".to_string()
            };
            return Err(CatalogError::Unavailable { bound, reason });
        } else {
            let remote = self.remote()?;
            let mut v = Vec::new();
            for n in 1..=bound {
                v.extend(remote.fetch_conductor(n).map_err(|e| match e {
                    CatalogError::Http(reason) => CatalogError::Unavailable { bound, reason },
                    e => e,
                })?);
            }
            v.sort_by(|a, b| label_order(&a.label, &b.label));
            v
        };
        check_complete(&entries)?;
        for e in &entries {
            e.validate()?;
        }
        self.persist(&entries)?;
        Ok(entries)
    }

    /// Cache first, then the bundled snapshot, then the remote catalog.
    pub fn fetch_curve(&self, label: &str) -> Result<CatalogEntry, CatalogError> {
        let parsed: CurveLabel = label.parse()?;
        if parsed.index.is_none() {
            return Err(CertifyError::BadLabel(label.to_string()).into());
        }
        if let Some(path) = &self.config.cache_path {
            if let Some(e) = read_cache(path)?.entries.remove(label) {
                return Ok(e);
            }
        }
        if self.fixture_covers(parsed.conductor) {
            return fixture_entries()
                .iter()
                .find(|e| e.label == label)
                .cloned()
                .ok_or_else(|| CatalogError::NotFound(label.to_string()));
        }
        if self.config.offline {
            return Err(CatalogError::NotFound(label.to_string()));
        }
        let all = self.remote()?.fetch_conductor(parsed.conductor)?;
        self.persist(&all)?;
        all.into_iter()
            .find(|e| e.label == label)
            .ok_or_else(|| CatalogError::NotFound(label.to_string()))
    }

    /// Records for the rule engine, covering every conductor `<= bound`.
    pub fn census_data(&self, bound: u64) -> Result<CensusData, CatalogError> {
        let entries = self.fetch_range(bound)?;
        let records = entries
            .iter()
            .map(CatalogEntry::to_record)
            .collect::<Result<_, _>>()?;
        let optimality_source = if self.fixture_covers(bound) {
            let m = fixture_manifest();
            format!(
                "{} (snapshot {})",
                m.optimality_source,
                m.snapshot.format("%Y-%m-%d")
            )
        } else {
            format!(
                "{} (fetched {})",
                self.config.endpoint,
                Utc::now().format("%Y-%m-%d")
            )
        };
        Ok(CensusData {
            records,
            covered_up_to: bound,
            optimality_source,
        })
    }
}
