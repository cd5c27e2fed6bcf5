#![allow(dead_code)]

pub mod lattice;

use std::collections::BTreeMap;

use manin_core::certify::{CensusData, CurveRecord, Optimality, Provenance};
use manin_core::elliptic::minimal_model_of;
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
pub struct FixtureCurve {
    pub label: String,
    pub conductor: u64,
    pub ainvs: [i64; 5],
    pub optimal: bool,
    pub modular_degree: Option<u64>,
    pub torsion_order: u64,
    pub torsion_structure: Vec<u64>,
    #[serde(default)]
    pub kodaira: BTreeMap<u64, String>,
}

impl FixtureCurve {
    /// Class letters of the label, e.g. `"a"` for `"37.a1"`.
    pub fn class(&self) -> &str {
        let tail = self.label.split('.').nth(1).expect("label has a dot");
        tail.trim_end_matches(|c: char| c.is_ascii_digit())
    }

    pub fn record(&self) -> CurveRecord {
        let optimality = Optimality {
            optimal: self.optimal,
            provenance: Provenance::Ingested {
                source: "fixture".into(),
            },
        };
        let mut r = CurveRecord::new(
            Some(self.label.clone()),
            minimal_model_of(self.ainvs).unwrap(),
            self.conductor,
            optimality,
        )
        .unwrap()
        .with_torsion_order(self.torsion_order)
        .with_kodaira(self.kodaira.clone());
        if let Some(d) = self.modular_degree {
            r = r.with_degree(d);
        }
        r
    }
}

pub fn fixture() -> Vec<FixtureCurve> {
    let text = include_str!("../../../catalog/fixtures/curves.jsonl");
    text.lines()
        .map(|l| serde_json::from_str(l).expect("fixture line"))
        .collect()
}

pub fn census_data() -> CensusData {
    CensusData {
        records: fixture().iter().map(FixtureCurve::record).collect(),
        covered_up_to: 600,
        optimality_source: "fixture".into(),
    }
}
