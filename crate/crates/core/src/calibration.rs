//! Frozen empirical constants for the inequality checkers.
//!
//! The shipped table is produced by `cargo run --release --example calibrate`.
//! Set `WELLSCAPE_CALIBRATION` to a JSON file to override it.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ENV_VAR: &str = "WELLSCAPE_CALIBRATION";

const SHIPPED: &str = include_str!("../data/calibration.json");

pub const KEYS: [&str; 8] = [
    "critical_lower",
    "critical_upper",
    "killerinterp",
    "pq_f",
    "pq_g",
    "pq_upper",
    "theorem2_r",
    "theorem2_s",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Calibration {
    pub constants: BTreeMap<String, f64>,
}

impl Calibration {
    pub fn shipped() -> Self {
        Self::parse(SHIPPED).expect("shipped calibration table is valid")
    }

    /// The table named by `WELLSCAPE_CALIBRATION`, else the shipped one.
    pub fn load() -> Result<Self> {
        match std::env::var_os(ENV_VAR) {
            Some(p) => Self::from_path(Path::new(&p)),
            None => Ok(Self::shipped()),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cal: Calibration = serde_json::from_str(text)?;
        for k in KEYS {
            match cal.constants.get(k) {
                Some(v) if v.is_finite() && *v > 0.0 => {}
                Some(v) => return Err(Error::Config(format!("calibration constant {k} = {v} must be positive"))),
                None => return Err(Error::Config(format!("calibration constant {k} missing"))),
            }
        }
        Ok(cal)
    }

    pub fn get(&self, key: &str) -> f64 {
        self.constants.get(key).copied().unwrap_or_else(|| panic!("unknown calibration constant {key}"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("map of floats serializes")
    }
}
