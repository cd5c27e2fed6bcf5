//! JSON-lines cache, one entry per line, keyed by label.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use manin_core::certify::label_order;

use crate::{CatalogEntry, CatalogError};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CacheContents {
    pub entries: BTreeMap<String, CatalogEntry>,
    /// `(line number, reason)` for lines that were skipped.
    pub skipped: Vec<(usize, String)>,
}

impl CacheContents {
    /// Entries in catalog label order.
    pub fn sorted(&self) -> Vec<&CatalogEntry> {
        let mut v: Vec<&CatalogEntry> = self.entries.values().collect();
        v.sort_by(|a, b| label_order(&a.label, &b.label));
        v
    }
}

/// A missing file reads as an empty cache. Later lines win over earlier
/// lines with the same label.
pub fn read_cache(path: &Path) -> Result<CacheContents, CatalogError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(CacheContents::default()),
        Err(e) => return Err(e.into()),
    };
    let mut out = CacheContents::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<CatalogEntry>(line) {
            Ok(e) => {
                out.entries.insert(e.label.clone(), e);
            }
            Err(err) => {
                log::warn!(
                    "{}:{}: skipping corrupt cache line: {err}",
                    path.display(),
                    i + 1
                );
                out.skipped.push((i + 1, err.to_string()));
            }
        }
    }
    Ok(out)
}

/// Writes to a temporary file in the same directory, then renames it over `path`.
pub fn write_cache<'a>(
    path: &Path,
    entries: impl IntoIterator<Item = &'a CatalogEntry>,
) -> Result<(), CatalogError> {
    let mut v: Vec<&CatalogEntry> = entries.into_iter().collect();
    v.sort_by(|a, b| label_order(&a.label, &b.label));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        for e in v {
            serde_json::to_writer(&mut w, e).map_err(io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
