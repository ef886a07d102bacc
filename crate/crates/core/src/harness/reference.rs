//! Published values the reports compare against, bundled read-only.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

const TABLE: &str = include_str!("../../data/reference.json");

#[derive(Debug, Clone, Deserialize)]
pub struct Cited<T> {
    pub value: T,
    pub source: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct StateReference {
    /// `[[re, im], [re, im]]` of alpha and beta.
    pub amplitudes: [[f64; 2]; 2],
    pub w_extrema: Cited<[f64; 2]>,
    pub theory_cd_cp: Cited<[f64; 2]>,
    pub measured_triple: Cited<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Bounds {
    pub cv_discrepancy: Cited<f64>,
    pub triple_discrepancy: Cited<f64>,
    pub equality_discrepancy: Cited<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ReferenceTable {
    pub e_joules: Cited<f64>,
    pub bounds: Bounds,
    pub states: BTreeMap<String, StateReference>,
}

impl ReferenceTable {
    pub fn state(&self, name: &str) -> Option<&StateReference> {
        self.states.get(name)
    }
}

pub fn reference() -> &'static ReferenceTable {
    static CELL: OnceLock<ReferenceTable> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(TABLE).expect("bundled reference table is valid"))
}
