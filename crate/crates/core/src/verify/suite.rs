use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde_json::{json, Value};

use super::{
    check_hot_spots, check_trichotomy, compare_eta1_mu2, interior_gradients, min_max_checks, overall, spectral_inclusion,
    symmetric_pipeline, Check, Status, SymmetricOptions, REPORT_SCHEMA,
};
use crate::eigensolve::{clusters, EigOptions};
use crate::error::{Error, Result};
use crate::fem_scalar::{align_cluster, assemble_scalar_with, solve_scalar_spectrum, ScalarEigenfunction, ScalarSystem};
use crate::fem_vector::{
    assemble_vector_with, classify_spectrum, eigenfield_csv, solve_vector_spectrum, ClassifyTolerances,
    GradientBank, VectorEigenfield, VectorSystem,
};
use crate::geometry::{detect_symmetries, is_lip, DomainKind, DomainSpec};
use crate::linalg::Vec3;
use crate::mesh::{generate_mesh_with, Mesh, MeshOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Hotspots,
    Trichotomy,
    Spectral,
    Symmetric,
    Curlcurl,
    All,
}

impl Suite {
    pub const NAMES: &'static [&'static str] = &["hotspots", "trichotomy", "spectral", "symmetric", "curlcurl", "all"];

    fn scalar(self) -> bool {
        self != Suite::Symmetric
    }

    fn vector(self) -> bool {
        matches!(self, Suite::Spectral | Suite::Curlcurl | Suite::All)
    }

    fn has(self, part: Suite) -> bool {
        self == part || self == Suite::All
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "hotspots" | "hot-spots" => Suite::Hotspots,
            "trichotomy" => Suite::Trichotomy,
            "spectral" => Suite::Spectral,
            "symmetric" => Suite::Symmetric,
            "curlcurl" | "curl-curl" => Suite::Curlcurl,
            "all" => Suite::All,
            other => {
                return Err(Error::InvalidInput(format!(
                    "unknown suite '{other}' (known: {})",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = [Suite::Hotspots, Suite::Trichotomy, Suite::Spectral, Suite::Symmetric, Suite::Curlcurl, Suite::All]
            .iter()
            .position(|s| s == self)
            .unwrap_or(0);
        f.write_str(Suite::NAMES[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub mesh: MeshOptions,
    /// Initial number of scalar eigenpairs; grown as needed.
    pub k: Option<usize>,
    /// Initial number of vector eigenpairs; grown as needed up to
    /// `max_vector_k`.
    pub vector_k: Option<usize>,
    pub max_vector_k: usize,
    pub eig: EigOptions,
    pub sign_tol: f64,
    pub zero_tol: f64,
    /// Bound on `|η₁ - μ₂| / μ₂`.
    pub gap_tol: f64,
    /// Lower bound on `(τ₁ - μ₂) / μ₂` (strict).
    pub margin_min: f64,
    pub classify: ClassifyTolerances,
    /// Scalar eigenvalues up to `inclusion_cutoff · μ₂` must reappear in the
    /// vector spectrum.
    pub inclusion_cutoff: f64,
    pub mismatch_tol: f64,
    pub random_fields: usize,
    /// 0-based axis for the symmetric suite; all axes when `None`.
    pub axis: Option<usize>,
    pub symmetric_agreement_tol: f64,
    pub timings: bool,
}

impl SuiteConfig {
    pub fn new(target_h: f64) -> Self {
        SuiteConfig {
            mesh: MeshOptions::new(target_h),
            k: None,
            vector_k: None,
            max_vector_k: 64,
            eig: EigOptions::default(),
            sign_tol: super::SIGN_TOL,
            zero_tol: super::ZERO_TOL,
            gap_tol: 0.02,
            margin_min: 0.0,
            classify: ClassifyTolerances::default(),
            inclusion_cutoff: 4.0,
            mismatch_tol: 0.05,
            random_fields: 10,
            axis: None,
            symmetric_agreement_tol: 1e-2,
            timings: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: Value,
    pub checks: Vec<Check>,
    pub status: Status,
    /// `(name, contents)` of gnuplot-readable CSV files.
    pub csv: Vec<(String, String)>,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

/// Scalar spectrum with enough pairs that the first nontrivial cluster is
/// complete and the largest value reaches `reach`.
fn scalar_spectrum(
    mesh: &Mesh,
    sys: &ScalarSystem,
    cfg: &SuiteConfig,
    first: usize,
    reach: f64,
    prev: Option<Vec<ScalarEigenfunction>>,
) -> Result<Vec<ScalarEigenfunction>> {
    let n = sys.num_dofs();
    let mut k = cfg.k.unwrap_or(mesh.dim + 3).max(first + 2).min(n);
    if let Some(p) = &prev {
        k = k.max(p.len());
    }
    let mut spec = match prev {
        Some(p) => p,
        None => solve_scalar_spectrum(mesh, sys, &EigOptions { k, ..cfg.eig })?,
    };
    loop {
        let values: Vec<f64> = spec.iter().map(|s| s.eigenvalue).collect();
        let groups = clusters(&values, super::CLUSTER_GAP);
        let complete = groups.iter().any(|g| g.contains(&first) && g.end < values.len());
        let reached = values.last().copied().unwrap_or(0.0) >= reach;
        if (complete && reached) || spec.len() >= n {
            return Ok(spec);
        }
        k = (2 * spec.len()).min(n);
        spec = solve_scalar_spectrum(mesh, sys, &EigOptions { k, ..cfg.eig })?;
    }
}

struct VectorRun {
    system: VectorSystem,
    raw: Vec<VectorEigenfield>,
    classified: Vec<VectorEigenfield>,
    scalar: Vec<ScalarEigenfunction>,
}

fn has_divfree(fields: &[VectorEigenfield]) -> bool {
    fields.iter().any(|f| {
        matches!(
            f.classification.as_ref().map(|c| &c.class),
            Some(crate::fem_vector::FieldClass::DivFreeType { .. })
        )
    })
}

fn vector_spectrum(
    mesh: &Mesh,
    sys_s: &ScalarSystem,
    scalar: Vec<ScalarEigenfunction>,
    cfg: &SuiteConfig,
    first: usize,
    mu2: f64,
    need_divfree: bool,
    need_reach: f64,
) -> Result<VectorRun> {
    let system = assemble_vector_with(mesh, cfg.eig.exec)?;
    let n = system.num_dofs();
    let mut k = cfg.vector_k.unwrap_or(2 * mesh.dim + 4).min(n);
    let mut scalar = scalar;
    loop {
        let mut raw = solve_vector_spectrum(&system, &EigOptions { k, ..cfg.eig })?;
        let values: Vec<f64> = raw.iter().map(|f| f.eigenvalue).collect();
        // a cluster touching the end may be incomplete
        let groups = clusters(&values, cfg.classify.cluster_gap);
        let mut usable = raw.clone();
        if k < n && groups.len() > 1 {
            usable.truncate(groups.last().map(|g| g.start).unwrap_or(raw.len()));
        }
        let top = usable.iter().map(|f| f.eigenvalue).fold(0.0, f64::max);
        scalar = scalar_spectrum(mesh, sys_s, cfg, first, top * (1.0 + cfg.classify.tol_eig), Some(scalar))?;
        let bank = GradientBank::new(mesh, &scalar);
        let classified = classify_spectrum(mesh, &system, &usable, &bank, &cfg.classify)?;
        let done = (!need_divfree || has_divfree(&classified)) && top >= need_reach * mu2;
        if done || k >= n || k >= cfg.max_vector_k {
            raw.truncate(usable.len());
            return Ok(VectorRun { system, raw, classified, scalar });
        }
        k = (2 * k).min(n).min(cfg.max_vector_k);
    }
}

fn nodal_samples(dim: usize, u: &[f64]) -> Vec<Vec3> {
    u.chunks(dim)
        .map(|c| {
            let mut p = [0.0; 3];
            p[..dim].copy_from_slice(c);
            p
        })
        .collect()
}

fn scalar_csv(mesh: &Mesh, values: &[f64]) -> String {
    let names = ["x", "y", "z"];
    let mut s = format!("# {} psi\n", names[..mesh.dim].join(" "));
    for (p, v) in mesh.vertices.iter().zip(values) {
        let cols: Vec<String> = p[..mesh.dim].iter().chain(std::iter::once(v)).map(|x| format!("{x:.16e}")).collect();
        s.push_str(&cols.join(" "));
        s.push('\n');
    }
    s
}

/// Runs a verification suite on one domain and assembles the report.
pub fn run_suite(domain: &DomainSpec, suite: Suite, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let start = Instant::now();
    let mut timings = serde_json::Map::new();
    let mut lap = |name: &str, t: &mut Instant| {
        timings.insert(name.to_string(), json!(t.elapsed().as_secs_f64()));
        *t = Instant::now();
    };
    let mut clock = Instant::now();

    domain.validate()?;
    let dim = domain.dim;
    let lip = is_lip(domain, true)?;
    let hypothesis = domain.exterior_ball_declared;
    let theorem = lip.is_lip && hypothesis;
    let symmetries = detect_symmetries(domain)?;
    let judged = |ok: bool| match (theorem, ok) {
        (false, _) => Status::Info,
        (true, true) => Status::Pass,
        (true, false) => Status::Fail,
    };

    let mut checks = Vec::new();
    let mut csv = Vec::new();
    let mut report = serde_json::Map::new();
    report.insert("schema".into(), json!(REPORT_SCHEMA));
    report.insert("suite".into(), json!(suite.to_string()));
    let kind = match &domain.kind {
        DomainKind::Polytope { faces, .. } => json!({"type": "polytope", "faces": faces.len()}),
        DomainKind::Disk { radius, clips } => json!({"type": "disk", "radius": radius, "clips": clips.len()}),
        DomainKind::Product { .. } => json!({"type": "product"}),
    };
    report.insert(
        "domain".into(),
        json!({
            "name": domain.name,
            "dim": dim,
            "kind": kind,
            "volume": domain.volume(),
            "dirichlet_faces": domain.dirichlet_faces(),
            "exterior_ball_declared": hypothesis,
            "symmetry_axes": symmetries.iter().map(|a| a + 1).collect::<Vec<_>>(),
        }),
    );
    report.insert("lip".into(), to_value(&lip));
    report.insert("hypotheses_satisfied".into(), json!(theorem));
    if !hypothesis {
        checks.push(Check::new(
            "hypotheses",
            Status::Info,
            None,
            None,
            "exterior ball condition not declared; theorem-based checks are informational",
        ));
    } else if !lip.is_lip {
        checks.push(Check::new(
            "hypotheses",
            Status::Info,
            None,
            None,
            "domain is not lip; theorem-based checks are informational",
        ));
    }
    report.insert(
        "tolerances".into(),
        json!({
            "sign_tol": cfg.sign_tol,
            "zero_tol": cfg.zero_tol,
            "cluster_gap": super::CLUSTER_GAP,
            "gap_tol": cfg.gap_tol,
            "margin_min": cfg.margin_min,
            "tol_eig": cfg.classify.tol_eig,
            "class_tol": cfg.classify.class_tol,
            "classify_cluster_gap": cfg.classify.cluster_gap,
            "mismatch_tol": cfg.mismatch_tol,
            "inclusion_cutoff": cfg.inclusion_cutoff,
            "solver_tol": cfg.eig.tol,
            "symmetric_agreement_tol": cfg.symmetric_agreement_tol,
        }),
    );

    if suite.scalar() {
        let mesh = generate_mesh_with(domain, &cfg.mesh)?;
        report.insert(
            "mesh".into(),
            json!({
                "target_h": cfg.mesh.target_h,
                "scale": cfg.mesh.scale,
                "h": mesh.h,
                "vertices": mesh.num_vertices(),
                "cells": mesh.num_cells(),
                "boundary_facets": mesh.boundary_facets.len(),
            }),
        );
        lap("mesh", &mut clock);
        let sys = assemble_scalar_with(&mesh, cfg.eig.exec)?;
        let first = if sys.has_dirichlet() { 0 } else { 1 };
        if sys.num_dofs() < first + 2 {
            return Err(Error::InvalidInput("mesh too coarse for the requested eigenpairs".into()));
        }
        let mut scalar = scalar_spectrum(&mesh, &sys, cfg, first, 0.0, None)?;
        lap("scalar_solve", &mut clock);
        let groups = clusters(&scalar.iter().map(|s| s.eigenvalue).collect::<Vec<_>>(), super::CLUSTER_GAP);
        let cluster = groups.iter().find(|g| g.contains(&first)).cloned().unwrap_or(first..first + 1);
        align_cluster(&mesh, &mut scalar[cluster.clone()])?;
        let values: Vec<f64> = scalar.iter().map(|s| s.eigenvalue).collect();
        let mu2 = values[first];
        report.insert(
            "scalar".into(),
            json!({
                "dofs": sys.num_dofs(),
                "eigenvalues": values,
                "residuals": scalar.iter().map(|s| s.residual).collect::<Vec<_>>(),
                "cluster_sizes": groups.iter().map(|g| g.len()).collect::<Vec<_>>(),
                "first_index": first,
                "mu2": mu2,
                "mu2_multiplicity": cluster.len(),
            }),
        );
        csv.push(("psi2".to_string(), scalar_csv(&mesh, &scalar[first].values)));

        if suite.has(Suite::Hotspots) {
            let mut out = Vec::new();
            for i in cluster.clone() {
                let v = check_hot_spots(&mesh, &scalar[i].values, scalar[i].eigenvalue)?;
                checks.push(Check::new(
                    format!("hot_spots[{i}]"),
                    judged(v.pass),
                    v.max.margin.into_iter().chain(v.min.margin).reduce(f64::min),
                    Some(v.tolerance),
                    format!(
                        "max at vertex {} (boundary: {}), min at vertex {} (boundary: {})",
                        v.max.vertex, v.max.on_boundary, v.min.vertex, v.min.on_boundary
                    ),
                ));
                out.push(json!({"index": i, "eigenvalue": scalar[i].eigenvalue, "verdict": to_value(&v)}));
            }
            report.insert("hot_spots".into(), Value::Array(out));
        }
        if suite.has(Suite::Trichotomy) {
            let mut out = Vec::new();
            for i in cluster.clone() {
                let v = check_trichotomy(dim, &interior_gradients(&mesh, &scalar[i].gradients), cfg.sign_tol, cfg.zero_tol, true);
                let worst = v.worst_margin();
                let pattern: Vec<String> = v.pattern().iter().map(|d| format!("{d:?}").to_lowercase()).collect();
                checks.push(Check::new(
                    format!("trichotomy[{i}]"),
                    judged(!v.has_mixed()),
                    worst,
                    Some(cfg.sign_tol),
                    pattern.join(", "),
                ));
                out.push(json!({"index": i, "eigenvalue": scalar[i].eigenvalue, "verdict": to_value(&v)}));
            }
            report.insert("trichotomy".into(), Value::Array(out));
        }
        lap("scalar_checks", &mut clock);

        if suite.vector() {
            let need_divfree = suite.has(Suite::Curlcurl) || suite.has(Suite::Spectral);
            let reach = if suite.has(Suite::Spectral) { cfg.inclusion_cutoff } else { 0.0 };
            let run = vector_spectrum(&mesh, &sys, scalar, cfg, first, mu2, need_divfree, reach)?;
            lap("vector_solve", &mut clock);
            let sysv = &run.system;
            let classified: Vec<Value> = run
                .classified
                .iter()
                .map(|f| {
                    json!({
                        "eigenvalue": f.eigenvalue,
                        "residual": f.residual,
                        "classification": to_value(&f.classification),
                    })
                })
                .collect();
            report.insert(
                "vector".into(),
                json!({
                    "dofs": sysv.num_dofs(),
                    "eigenvalues": run.raw.iter().map(|f| f.eigenvalue).collect::<Vec<_>>(),
                    "residuals": run.raw.iter().map(|f| f.residual).collect::<Vec<_>>(),
                    "classified": classified,
                    "boundary_form_active": sysv.boundary_form_active(),
                    "boundary_form_size": sysv.boundary_form_size(),
                    "clamped_fraction": sysv.clamped_fraction(),
                }),
            );
            csv.push(("eta1".to_string(), eigenfield_csv(&mesh, &run.raw[0].values)));
            checks.push(Check::new(
                "boundary_form",
                Status::Info,
                Some(sysv.boundary_form_size()),
                None,
                if sysv.boundary_form_active() { "curvature term active" } else { "curvature term identically zero" },
            ));
            if sysv.clamped_fraction() > 0.05 {
                checks.push(Check::new(
                    "clamped_fraction",
                    Status::Info,
                    Some(sysv.clamped_fraction()),
                    Some(0.05),
                    "corner clamping fixes more than 5% of the boundary vertices",
                ));
            }
            let cmp = compare_eta1_mu2(mu2, &run.classified, cfg.gap_tol, cfg.margin_min);
            report.insert("comparison".into(), to_value(&cmp));
            let cmp_status = |s: Status| if theorem || s == Status::Inconclusive { s } else { Status::Info };
            if suite.has(Suite::Spectral) {
                let gap_ok = cmp.gap <= cfg.gap_tol;
                checks.push(Check::new(
                    "eta1_vs_mu2",
                    judged(gap_ok),
                    Some(cmp.gap),
                    Some(cfg.gap_tol),
                    format!("eta1 = {:.6}, mu2 = {:.6}", cmp.eta1, cmp.mu2),
                ));
                let eta_values: Vec<f64> = run.raw.iter().map(|f| f.eigenvalue).collect();
                let first_cluster = clusters(&eta_values, super::CLUSTER_GAP).into_iter().next().unwrap_or(0..1);
                let mut signs = Vec::new();
                for i in first_cluster {
                    let v = check_trichotomy(dim, &nodal_samples(dim, &run.raw[i].values), cfg.sign_tol, cfg.zero_tol, true);
                    let worst = v.worst_margin();
                    checks.push(Check::new(
                        format!("sign_property[{i}]"),
                        judged(!v.has_mixed()),
                        worst,
                        Some(cfg.sign_tol),
                        "componentwise sign of the first eigenfield",
                    ));
                    signs.push(to_value(&v));
                }
                report.insert("sign_property".into(), Value::Array(signs));
                let grad = run.scalar.get(first).map(|s| {
                    let g = crate::fem_scalar::recovered_gradient(&mesh, &s.gradients);
                    g.iter().flat_map(|x| x[..dim].to_vec()).collect::<Vec<f64>>()
                });
                let mm = min_max_checks(sysv, cmp.eta1, grad.as_deref(), cfg.random_fields, cfg.eig.seed);
                checks.push(Check::new(
                    "min_max",
                    if mm.pass { Status::Pass } else { Status::Fail },
                    Some(cmp.eta1),
                    None,
                    "eta1 below the Rayleigh quotients of the projected gradient and random admissible fields",
                ));
                report.insert("min_max".into(), to_value(&mm));
                let scalar_values: Vec<f64> = run.scalar.iter().map(|s| s.eigenvalue).collect();
                let tol_eig = cfg.classify.tol_eig;
                let inc = spectral_inclusion(
                    &scalar_values,
                    &run.classified,
                    cfg.inclusion_cutoff * mu2,
                    cfg.mismatch_tol,
                    |_, _| tol_eig,
                );
                checks.push(Check::new(
                    "spectral_inclusion",
                    if theorem { inc.status } else { Status::Info },
                    Some(inc.entries.len() as f64),
                    Some(tol_eig),
                    "every scalar eigenvalue up to the cutoff has a gradient-type partner",
                ));
                report.insert("spectral_inclusion".into(), to_value(&inc));
            }
            if suite.has(Suite::Curlcurl) {
                checks.push(Check::new(
                    "tau1_margin",
                    cmp_status(match cmp.margin {
                        None => Status::Inconclusive,
                        Some(m) if m > cfg.margin_min => Status::Pass,
                        Some(_) => Status::Fail,
                    }),
                    cmp.margin,
                    Some(cfg.margin_min),
                    match cmp.tau1 {
                        Some(t) => format!("tau1 = {t:.6}, mu2 = {mu2:.6}"),
                        None => cmp.note.clone().unwrap_or_default(),
                    },
                ));
            }
            lap("vector_checks", &mut clock);
        }
    }

    if suite.has(Suite::Symmetric) {
        let full = symmetries.len() == dim;
        if !full && suite == Suite::Symmetric {
            return Err(Error::Precondition(format!(
                "{} is not symmetric in every coordinate",
                domain.name
            )));
        }
        let mut out = Vec::new();
        if full {
            let axes: Vec<usize> = match cfg.axis {
                Some(j) => vec![j],
                None => (0..dim).collect(),
            };
            let opts = SymmetricOptions {
                mesh: cfg.mesh,
                eig: EigOptions { k: 2, ..cfg.eig },
                sign_tol: cfg.sign_tol,
                zero_tol: cfg.zero_tol,
                agreement_tol: cfg.symmetric_agreement_tol,
                full_domain: false,
            };
            for j in axes {
                let r = symmetric_pipeline(domain, j, &opts)?;
                let tag = format!("symmetric[x{}]", j + 1);
                checks.push(Check::pass_if(
                    format!("{tag}.agreement"),
                    r.agreement <= r.agreement_tol,
                    r.agreement,
                    r.agreement_tol,
                    format!("half {:.8}, orthant {:.8}", r.half_eigenvalue, r.orthant_eigenvalue),
                ));
                let worst = r.orthant_trichotomy.worst_margin();
                checks.push(Check::new(
                    format!("{tag}.orthant_trichotomy"),
                    if r.orthant_trichotomy.has_mixed() { Status::Fail } else { Status::Pass },
                    worst,
                    Some(cfg.sign_tol),
                    format!("orthant {:?}", r.orthant),
                ));
                checks.push(Check::new(
                    format!("{tag}.hot_spots"),
                    if r.reconstruction_hot_spots.pass { Status::Pass } else { Status::Fail },
                    r.reconstruction_hot_spots.max.margin,
                    Some(r.reconstruction_hot_spots.tolerance),
                    "reflected eigenfunction on the whole domain",
                ));
                out.push(to_value(&r));
            }
        } else {
            checks.push(Check::new(
                "symmetric",
                Status::Info,
                None,
                None,
                "not symmetric in every coordinate; reduction skipped",
            ));
        }
        report.insert("symmetric".into(), Value::Array(out));
        lap("symmetric", &mut clock);
    }

    let status = overall(&checks);
    let count = |s: Status| checks.iter().filter(|c| c.status == s).count();
    report.insert("checks".into(), to_value(&checks));
    report.insert(
        "summary".into(),
        json!({
            "status": status,
            "passed": count(Status::Pass),
            "failed": count(Status::Fail),
            "inconclusive": count(Status::Inconclusive),
            "info": count(Status::Info),
        }),
    );
    if cfg.timings {
        timings.insert("total".into(), json!(start.elapsed().as_secs_f64()));
        report.insert("timings".into(), Value::Object(timings));
    }
    Ok(SuiteOutcome { report: Value::Object(report), checks, status, csv })
}
