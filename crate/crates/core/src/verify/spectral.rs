use serde::Serialize;

use super::Status;
use crate::fem_vector::{project_admissible, random_admissible, FieldClass, VectorEigenfield, VectorSystem};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub mu2: f64,
    pub eta1: f64,
    /// `|η₁ - μ₂| / μ₂`.
    pub gap: f64,
    pub gap_tol: f64,
    /// Smallest eigenvalue classified divergence-free.
    pub tau1: Option<f64>,
    /// `(τ₁ - μ₂) / μ₂`.
    pub margin: Option<f64>,
    pub margin_min: f64,
    pub status: Status,
    pub note: Option<String>,
}

/// Compares the bottom of the vector spectrum with the first nontrivial
/// scalar eigenvalue. Without a divergence-free eigenvalue among `fields`
/// the verdict is inconclusive.
pub fn compare_eta1_mu2(mu2: f64, fields: &[VectorEigenfield], gap_tol: f64, margin_min: f64) -> Comparison {
    let eta1 = fields.iter().map(|f| f.eigenvalue).fold(f64::INFINITY, f64::min);
    let gap = (eta1 - mu2).abs() / mu2;
    let tau1 = fields
        .iter()
        .filter(|f| matches!(f.classification.as_ref().map(|c| &c.class), Some(FieldClass::DivFreeType { .. })))
        .map(|f| f.eigenvalue)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    let margin = tau1.map(|t| (t - mu2) / mu2);
    let (status, note) = match margin {
        None => (
            Status::Inconclusive,
            Some(format!(
                "no divergence-free eigenfield among the {} computed; raise k",
                fields.len()
            )),
        ),
        Some(m) if gap <= gap_tol && m > margin_min => (Status::Pass, None),
        Some(_) => (Status::Fail, None),
    };
    Comparison { mu2, eta1, gap, gap_tol, tau1, margin, margin_min, status, note }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionEntry {
    /// Index in the scalar spectrum.
    pub index: usize,
    pub mu: f64,
    pub eta: Option<f64>,
    pub relative_difference: Option<f64>,
    pub tolerance: f64,
    pub mismatch: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub cutoff: f64,
    pub mismatch_tol: f64,
    pub entries: Vec<InclusionEntry>,
    pub status: Status,
}

/// Matches every nonzero scalar eigenvalue up to `cutoff` with a distinct
/// gradient-type vector eigenvalue (nearest first). `tolerance(n, μ_n)`
/// gives the admissible relative difference. Inconclusive when the vector
/// spectrum does not reach the cutoff.
pub fn spectral_inclusion(
    scalar: &[f64],
    fields: &[VectorEigenfield],
    cutoff: f64,
    mismatch_tol: f64,
    tolerance: impl Fn(usize, f64) -> f64,
) -> InclusionReport {
    let top = scalar.iter().copied().fold(0.0, f64::max);
    let floor = 1e-8 * top.max(1.0);
    let mut used = vec![false; fields.len()];
    let mut entries = Vec::new();
    for (n, &mu) in scalar.iter().enumerate() {
        if mu <= floor || mu > cutoff {
            continue;
        }
        let tol = tolerance(n, mu);
        let best = fields
            .iter()
            .enumerate()
            .filter(|(i, f)| {
                !used[*i] && matches!(f.classification.as_ref().map(|c| &c.class), Some(FieldClass::GradientType { .. }))
            })
            .min_by(|a, b| (a.1.eigenvalue - mu).abs().total_cmp(&(b.1.eigenvalue - mu).abs()));
        let entry = match best {
            Some((i, f)) => {
                used[i] = true;
                let rel = (f.eigenvalue - mu).abs() / mu;
                let mismatch = f.classification.as_ref().map(|c| c.mismatch);
                InclusionEntry {
                    index: n,
                    mu,
                    eta: Some(f.eigenvalue),
                    relative_difference: Some(rel),
                    tolerance: tol,
                    mismatch,
                    pass: rel <= tol && mismatch.is_some_and(|m| m <= mismatch_tol),
                }
            }
            None => InclusionEntry {
                index: n,
                mu,
                eta: None,
                relative_difference: None,
                tolerance: tol,
                mismatch: None,
                pass: false,
            },
        };
        entries.push(entry);
    }
    let reached = fields.iter().map(|f| f.eigenvalue).fold(0.0, f64::max) >= cutoff;
    let status = if entries.iter().all(|e| e.pass) {
        Status::Pass
    } else if !reached {
        Status::Inconclusive
    } else {
        Status::Fail
    };
    InclusionReport { cutoff, mismatch_tol, entries, status }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinMaxCheck {
    pub eta1: f64,
    /// Rayleigh quotient of the admissible projection of the recovered
    /// gradient of the first nontrivial scalar eigenfunction.
    pub gradient_quotient: Option<f64>,
    pub random_quotients: Vec<f64>,
    pub pass: bool,
}

/// `η₁` must not exceed the Rayleigh quotient of any admissible trial
/// field: the projected scalar gradient and `count` random fields.
pub fn min_max_checks(
    system: &VectorSystem,
    eta1: f64,
    gradient: Option<&[f64]>,
    count: usize,
    seed: u64,
) -> MinMaxCheck {
    let slack = 1e-9 * eta1.abs().max(1.0);
    let gradient_quotient = gradient.map(|g| system.rayleigh_quotient(&project_admissible(system, g)));
    let random_quotients: Vec<f64> = random_admissible(system, count, seed)
        .iter()
        .map(|u| system.rayleigh_quotient(u))
        .collect();
    let pass = gradient_quotient.iter().chain(&random_quotients).all(|&q| eta1 <= q + slack);
    MinMaxCheck { eta1, gradient_quotient, random_quotients, pass }
}
