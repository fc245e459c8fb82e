//! Property-suite reports and the deterministic trial runner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Aggregated result of one property over many seeded trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: String,
    pub trials: usize,
    pub failures: usize,
    /// Largest residual observed across trials (property specific).
    pub max_residual: f64,
    /// Description of the lowest-index failing trial.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub ok: bool,
    pub residual: f64,
    pub note: Option<String>,
}

impl Trial {
    pub fn pass(residual: f64) -> Self {
        Self {
            ok: true,
            residual,
            note: None,
        }
    }

    pub fn fail(residual: f64, note: impl Into<String>) -> Self {
        Self {
            ok: false,
            residual,
            note: Some(note.into()),
        }
    }

    pub fn check(ok: bool, residual: f64, note: impl FnOnce() -> String) -> Self {
        if ok {
            Self::pass(residual)
        } else {
            Self::fail(residual, note())
        }
    }
}

/// Runs `trials` independent trials in parallel and merges them in index
/// order, so the report does not depend on scheduling.
pub fn run_trials<F>(property: &str, trials: usize, trial: F) -> PropertyReport
where
    F: Fn(u64) -> Trial + Sync,
{
    let outcomes: Vec<Trial> = (0..trials as u64).into_par_iter().map(&trial).collect();
    let mut report = PropertyReport {
        property: property.to_string(),
        trials,
        failures: 0,
        max_residual: 0.0,
        first_failure: None,
    };
    for (i, t) in outcomes.into_iter().enumerate() {
        report.max_residual = report.max_residual.max(t.residual);
        if !t.ok {
            report.failures += 1;
            if report.first_failure.is_none() {
                report.first_failure = Some(format!("trial {i}: {}", t.note.unwrap_or_default()));
            }
        }
    }
    report
}
