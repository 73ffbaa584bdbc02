//! Numerical checks of monotonicity, hot spots and spectral relations, and
//! the suites that combine them into reports.

mod convergence;
mod hotspots;
mod report;
mod spectral;
mod suite;
mod symmetric;
mod trichotomy;

use serde::Serialize;

pub use convergence::{convergence_study, ConvergenceStudy, Quantity, StudyRow};
pub use hotspots::{check_hot_spots, HotSpotsVerdict};
pub use report::{to_json, REPORT_SCHEMA};
pub use spectral::{
    compare_eta1_mu2, min_max_checks, spectral_inclusion, Comparison, InclusionEntry, InclusionReport, MinMaxCheck,
};
pub use suite::{run_suite, Suite, SuiteConfig, SuiteOutcome};
pub use symmetric::{antisymmetric_eigenvalue, lip_orthant, symmetric_pipeline, OrthantSigns, SymmetricOptions, SymmetricReport};
pub use trichotomy::{check_trichotomy, interior_gradients, Direction, DirectionVerdict, TrichotomyVerdict};

/// Relative sign tolerance of the trichotomy and sign-property checks.
pub const SIGN_TOL: f64 = 5e-3;
/// Relative threshold below which a direction counts as identically zero.
pub const ZERO_TOL: f64 = 1e-6;
/// Relative gap below which eigenvalues are reported as one cluster.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    /// Recorded for information; does not affect the outcome.
    Info,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status, value: Option<f64>, tolerance: Option<f64>, detail: impl Into<String>) -> Self {
        Check { name: name.into(), status, value, tolerance, detail: detail.into() }
    }

    pub fn pass_if(name: impl Into<String>, ok: bool, value: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Check::new(name, status, Some(value), Some(tolerance), detail)
    }
}

/// Fail beats inconclusive beats pass; informational checks are ignored.
pub fn overall(checks: &[Check]) -> Status {
    if checks.iter().any(|c| c.status == Status::Fail) {
        Status::Fail
    } else if checks.iter().any(|c| c.status == Status::Inconclusive) {
        Status::Inconclusive
    } else {
        Status::Pass
    }
}
