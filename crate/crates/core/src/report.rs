//! Structured pass/fail records emitted by every check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Version of the JSON layout of both report types.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridInfo {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl GridInfo {
    pub fn of(grid: &[f64]) -> Option<GridInfo> {
        let min = grid.iter().copied().fold(f64::INFINITY, f64::min);
        let max = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (!grid.is_empty()).then_some(GridInfo {
            min,
            max,
            points: grid.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    /// Identity or property being checked, e.g. `dimwalk`.
    pub check: String,
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridInfo>,
    pub max_error: f64,
    pub tolerance: f64,
    /// Abscissa of the worst error, when meaningful.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_at: Option<f64>,
    pub pass: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, Value>,
}

impl VerificationReport {
    /// Report that passes iff `max_error ≤ tolerance` (NaN never passes).
    pub fn new(check: impl Into<String>, model: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        VerificationReport {
            schema_version: SCHEMA_VERSION,
            check: check.into(),
            model: model.into(),
            k: None,
            t: None,
            grid: None,
            max_error,
            tolerance,
            worst_at: None,
            pass: max_error <= tolerance,
            details: BTreeMap::new(),
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = Some(t);
        self
    }

    pub fn with_grid(mut self, grid: &[f64]) -> Self {
        self.grid = GridInfo::of(grid);
        self
    }

    pub fn with_worst_at(mut self, r: Option<f64>) -> Self {
        self.worst_at = r;
        self
    }

    pub fn with_detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    /// Overrides the verdict; used by checks whose pass rule is not a single comparison.
    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub schema_version: u32,
    pub model: String,
    pub k: usize,
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    pub statistic: String,
    pub observed: f64,
    pub predicted: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_error: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub details: BTreeMap<String, Value>,
}

impl SimulationReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: impl Into<String>,
        k: usize,
        t: f64,
        n: usize,
        seed: u64,
        statistic: impl Into<String>,
        observed: f64,
        predicted: f64,
    ) -> Self {
        SimulationReport {
            schema_version: SCHEMA_VERSION,
            model: model.into(),
            k,
            t,
            n,
            seed,
            statistic: statistic.into(),
            observed,
            predicted,
            standard_error: None,
            tolerance: 0.0,
            pass: observed == predicted,
            details: BTreeMap::new(),
        }
    }

    /// Pass iff `|observed − predicted| ≤ z·se`.
    pub fn within_se(mut self, se: f64, z: f64) -> Self {
        self.standard_error = Some(se);
        self.tolerance = z * se;
        self.pass = (self.observed - self.predicted).abs() <= self.tolerance;
        self
    }

    /// Pass iff `|observed − predicted| ≤ tol`.
    pub fn within(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self.pass = (self.observed - self.predicted).abs() <= tol;
        self
    }

    pub fn with_detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn with_pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}
