//! Client for the catalog's HTTP JSON API.

use std::sync::Mutex;
use std::thread::sleep;
use std::time::{Duration, Instant};

use chrono::Utc;
use serde::Deserialize;

use crate::{CatalogEntry, CatalogError, Source};

pub const DEFAULT_ENDPOINT: &str = "https://www.lmfdb.org/api/ec_curvedata/";
pub const ENDPOINT_ENV: &str = "MANIN_CATALOG_URL";

const FIELDS: &str = "lmfdb_label,conductor,ainvs,optimality,degree,torsion,class_size";

#[derive(Debug, Deserialize)]
struct Page {
    data: Vec<RemoteCurve>,
    #[serde(default)]
    next: Option<String>,
}

#[derive(Debug, Deserialize)]
struct RemoteCurve {
    lmfdb_label: String,
    conductor: u64,
    ainvs: [i64; 5],
    /// 1 for the optimal curve, 0 otherwise, `n > 1` when one of `n` candidates is optimal.
    optimality: i64,
    degree: Option<u64>,
    torsion: u64,
    class_size: Option<u64>,
}

/// Blocking client that spaces requests at least `min_interval` apart.
pub struct RemoteClient {
    endpoint: String,
    min_interval: Duration,
    retries: u32,
    http: reqwest::blocking::Client,
    last: Mutex<Option<Instant>>,
}

impl RemoteClient {
    pub fn new(endpoint: &str, min_interval: Duration, retries: u32) -> Result<Self, CatalogError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("manin/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| CatalogError::Http(e.to_string()))?;
        Ok(RemoteClient {
            endpoint: endpoint.to_string(),
            min_interval,
            retries,
            http,
            last: Mutex::new(None),
        })
    }

    fn throttle(&self) {
        let mut last = self.last.lock().expect("rate limiter lock");
        if let Some(t) = *last {
            let wait = self.min_interval.saturating_sub(t.elapsed());
            if !wait.is_zero() {
                sleep(wait);
            }
        }
        *last = Some(Instant::now());
    }

    fn get_page(&self, conductor: u64, offset: usize) -> Result<Page, CatalogError> {
        self.throttle();
        let resp = self
            .http
            .get(&self.endpoint)
            .query(&[
                ("conductor", format!("i{conductor}")),
                ("_format", "json".into()),
                ("_fields", FIELDS.into()),
                ("_offset", offset.to_string()),
            ])
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| CatalogError::Http(e.to_string()))?;
        let body = resp.text().map_err(|e| CatalogError::Http(e.to_string()))?;
        serde_json::from_str(&body).map_err(|e| CatalogError::Http(format!("bad response: {e}")))
    }

    fn fetch_once(&self, conductor: u64) -> Result<Vec<CatalogEntry>, CatalogError> {
        let mut out = Vec::new();
        loop {
            let page = self.get_page(conductor, out.len())?;
            let n = page.data.len();
            let now = Utc::now();
            for c in page.data {
                out.push(CatalogEntry {
                    label: c.lmfdb_label,
                    conductor: c.conductor,
                    ainvs: c.ainvs,
                    optimal: c.optimality == 1,
                    modular_degree: if c.optimality == 1 { c.degree } else { None },
                    torsion_order: c.torsion,
                    class_size: c.class_size,
                    kodaira: None,
                    source: Source::Remote,
                    fetched_at: now,
                });
            }
            if page.next.is_none() || n == 0 {
                break;
            }
        }
        crate::check_complete(&out)?;
        Ok(out)
    }

    /// All curves of one conductor, retried with exponential backoff when a
    /// request fails or the classes come back incomplete.
    pub fn fetch_conductor(&self, conductor: u64) -> Result<Vec<CatalogEntry>, CatalogError> {
        let mut delay = self.min_interval.max(Duration::from_millis(50));
        let mut attempt = 0;
        loop {
            match self.fetch_once(conductor) {
                Ok(v) => return Ok(v),
                Err(e) if attempt < self.retries => {
                    log::warn!("conductor {conductor}: {e}; retrying in {delay:?}");
                    sleep(delay);
                    delay *= 2;
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}
