use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use manin_core::certify::{CurveLabel, CurveRecord, Optimality, Provenance};
use manin_core::elliptic::minimal_model_of;
use serde::{Deserialize, Serialize};

use crate::CatalogError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Remote,
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    pub conductor: u64,
    pub ainvs: [i64; 5],
    pub optimal: bool,
    pub modular_degree: Option<u64>,
    pub torsion_order: u64,
    /// Number of curves in the isogeny class according to the catalog.
    pub class_size: Option<u64>,
    pub kodaira: Option<BTreeMap<u64, String>>,
    pub source: Source,
    pub fetched_at: DateTime<Utc>,
}

impl CatalogEntry {
    pub fn parsed_label(&self) -> Result<CurveLabel, CatalogError> {
        Ok(self.label.parse::<CurveLabel>()?)
    }

    pub fn class_label(&self) -> Result<String, CatalogError> {
        Ok(self.parsed_label()?.class_label())
    }

    /// Nonsingular model, label prefix equal to the conductor, and bad primes
    /// of the minimal model dividing the conductor.
    pub fn validate(&self) -> Result<(), CatalogError> {
        let invalid = |reason: String| CatalogError::Invalid {
            label: self.label.clone(),
            reason,
        };
        let l = self.parsed_label()?;
        if l.conductor != self.conductor {
            return Err(invalid(format!(
                "label prefix {} differs from conductor {}",
                l.conductor, self.conductor
            )));
        }
        let m = minimal_model_of(self.ainvs).map_err(|e| invalid(e.to_string()))?;
        for p in m.bad_primes() {
            let shown = p.to_string();
            let p: u64 = p
                .try_into()
                .map_err(|_| invalid(format!("bad prime {shown} too large")))?;
            if self.conductor % p != 0 {
                return Err(invalid(format!(
                    "bad prime {p} does not divide {}",
                    self.conductor
                )));
            }
        }
        Ok(())
    }

    pub fn to_record(&self) -> Result<CurveRecord, CatalogError> {
        let model = minimal_model_of(self.ainvs).map_err(|e| CatalogError::Invalid {
            label: self.label.clone(),
            reason: e.to_string(),
        })?;
        let source = match self.source {
            Source::Remote => "remote catalog",
            Source::Fixture => "bundled fixture",
        };
        let optimality = Optimality {
            optimal: self.optimal,
            provenance: Provenance::Ingested {
                source: format!("{source}, {}", self.fetched_at.to_rfc3339()),
            },
        };
        let mut r = CurveRecord::new(Some(self.label.clone()), model, self.conductor, optimality)?
            .with_torsion_order(self.torsion_order);
        if let Some(d) = self.modular_degree {
            r = r.with_degree(d);
        }
        if let Some(k) = &self.kodaira {
            r = r.with_kodaira(k.clone());
        }
        Ok(r)
    }
}
