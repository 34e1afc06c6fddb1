//! Solution records: human-readable, machine-parseable TOML with the solve
//! status, phases, per-user metrics, and the solver traces. Quantized
//! records carry the pre-quantization metrics in a `[continuous]` block;
//! wide-beam records add a `[coverage]` block.

use std::path::Path;

use serde::{Deserialize, Serialize};

use risbeam_core::{CoverageReport, Solution, SolverStatus};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBlock {
    pub user_powers: Vec<f64>,
    pub weighted_values: Vec<f64>,
    pub ratios: Vec<f64>,
    pub min_weighted_power: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageBlock {
    pub range_m: f64,
    pub min_power: f64,
    pub max_power: f64,
    pub ripple_db: f64,
    pub sample_count: usize,
}

impl From<&CoverageReport> for CoverageBlock {
    fn from(r: &CoverageReport) -> Self {
        Self {
            range_m: r.range_m,
            min_power: r.min_power,
            max_power: r.max_power,
            ripple_db: r.ripple_db,
            sample_count: r.sample_count,
        }
    }
}

/// On-disk solution record. Scalar and array fields come first so the
/// optional trailing tables stay valid TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub status: String,
    #[serde(default)]
    pub gap: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub inner_iterations: u64,
    #[serde(default)]
    pub stall_events: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bit_depth: Option<u32>,
    pub omega: Vec<f64>,
    #[serde(default)]
    pub user_powers: Vec<f64>,
    #[serde(default)]
    pub weighted_values: Vec<f64>,
    #[serde(default)]
    pub ratios: Vec<f64>,
    #[serde(default)]
    pub active_set: Vec<usize>,
    #[serde(default)]
    pub lambda_trace: Vec<f64>,
    #[serde(default)]
    pub gap_trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous: Option<MetricsBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageBlock>,
}

pub fn status_str(status: SolverStatus) -> &'static str {
    match status {
        SolverStatus::Converged => "converged",
        SolverStatus::MaxOuterIterations => "max_outer_iterations",
    }
}

impl SolutionRecord {
    pub fn from_solution(solution: &Solution, ratios: Vec<f64>) -> Self {
        Self {
            status: status_str(solution.status).to_string(),
            gap: solution.gap,
            tau: solution.tau,
            inner_iterations: solution.inner_iterations as u64,
            stall_events: solution.stall_events as u64,
            bit_depth: solution.phases.bit_depth(),
            omega: solution.phases.phases().to_vec(),
            user_powers: solution.user_powers.clone(),
            weighted_values: solution.weighted_values.clone(),
            ratios,
            active_set: solution.active_set.clone(),
            lambda_trace: solution.lambda_trace.clone(),
            gap_trace: solution.gap_trace.clone(),
            continuous: None,
            coverage: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Parse(format!("solution file: {e}")))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("solution records serialize")
    }
}
