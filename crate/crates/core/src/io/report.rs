//! Versioned JSON run reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pdhg::{SolveResult, SolverConfig, Status};

pub const REPORT_FORMAT_VERSION: &str = "batchlp-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub index: usize,
    pub status: Status,
    pub objective: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl ProblemReport {
    pub fn from_result(index: usize, r: &SolveResult) -> Self {
        ProblemReport {
            index,
            status: r.status,
            objective: r.objective,
            dual_objective: r.dual_objective,
            iterations: r.iterations,
        }
    }
}

/// Wall-clock seconds per phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub load_s: f64,
    pub norm_estimate_s: f64,
    pub solve_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format_version: String,
    pub command: String,
    pub input: Option<String>,
    pub problems: Vec<ProblemReport>,
    pub times: PhaseTimes,
    pub config: SolverConfig,
    /// Driver outcome for `fsb` and `obbt`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl RunReport {
    pub fn new(command: &str, input: Option<String>, config: SolverConfig) -> Self {
        RunReport {
            format_version: REPORT_FORMAT_VERSION.to_string(),
            command: command.to_string(),
            input,
            problems: Vec::new(),
            times: PhaseTimes::default(),
            config,
            outcome: None,
            error: None,
        }
    }

    pub fn with_outcome<T: Serialize>(mut self, outcome: &T) -> Result<Self> {
        self.outcome = Some(serde_json::to_value(outcome).map_err(|e| Error::Io(e.to_string()))?);
        Ok(self)
    }

    /// Pretty JSON. Non-finite numbers are written as `null`.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let r: RunReport = serde_json::from_str(text).map_err(|e| Error::Io(e.to_string()))?;
        if r.format_version != REPORT_FORMAT_VERSION {
            return Err(Error::Io(format!("unsupported report version '{}'", r.format_version)));
        }
        Ok(r)
    }
}
