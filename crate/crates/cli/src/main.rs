//! `hotspots`: classify domains, solve eigenproblems, run verification suites
//! and convergence studies.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use hotspots_core::eigensolve::EigOptions;
use hotspots_core::fem_scalar::{assemble_scalar_with, solve_scalar_spectrum};
use hotspots_core::fem_vector::{assemble_vector_with, eigenfield_csv, solve_vector_spectrum};
use hotspots_core::geometry::{builtin_domain, detect_symmetries, is_lip, read_domain, Bc, Builtin, DomainSpec};
use hotspots_core::mesh::{generate_mesh_with, MeshOptions};
use hotspots_core::oracle;
use hotspots_core::util::write_atomic;
use hotspots_core::verify::{
    convergence_study, run_suite, to_json, Quantity, Status, Suite, SuiteConfig, REPORT_SCHEMA,
};
use hotspots_core::{Error, Result};
use serde_json::{json, Value};

const EXIT_ERROR: u8 = 1;
const EXIT_NOT_LIP: u8 = 2;
const EXIT_FAIL: u8 = 3;
const EXIT_INCONCLUSIVE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "hotspots", version, about = "Finite element checks of Neumann eigenfunctions on lip domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a domain is lip and list its reflection symmetries.
    Classify {
        #[command(flatten)]
        domain: DomainArgs,
        /// Octahedron apex height (same as --height).
        #[arg(long = "h")]
        h: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the low scalar (and optionally vector) spectrum.
    Solve {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 6)]
        k: usize,
        /// Also solve the vector problem.
        #[arg(long)]
        vector: bool,
    },
    /// Run a verification suite and write a report.
    Verify {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value = "all")]
        suite: String,
        /// Initial number of scalar eigenpairs.
        #[arg(long)]
        k: Option<usize>,
        /// Axis of antisymmetry (1-based) for the symmetric suite.
        #[arg(long)]
        j: Option<usize>,
        #[arg(long = "tol-sign")]
        tol_sign: Option<f64>,
        #[arg(long = "tol-zero")]
        tol_zero: Option<f64>,
    },
    /// Convergence study of the first nontrivial eigenvalue on nested meshes.
    Study {
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        run: RunArgs,
        /// `mu2` (scalar) or `eta1` (vector).
        #[arg(long, default_value = "mu2")]
        quantity: String,
        /// Reference value; defaults to the analytic value when one is known.
        #[arg(long)]
        oracle: Option<f64>,
        #[arg(long, default_value_t = 6)]
        k: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct DomainArgs {
    /// Builtin domain name.
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
    /// Domain description file.
    #[arg(long)]
    file: Option<PathBuf>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    len: Option<f64>,
    /// Octahedron apex height.
    #[arg(long, visible_alias = "apex")]
    height: Option<f64>,
    /// Centre rectangles and boxes at the origin.
    #[arg(long)]
    centered: bool,
    /// Face id carrying a Dirichlet condition (repeatable).
    #[arg(long)]
    dirichlet: Vec<usize>,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Target mesh size.
    #[arg(long = "h", default_value_t = 0.1)]
    h: f64,
    /// Refinement levels (a study uses this many nested meshes; verify runs
    /// on the finest).
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; CSV files are written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Omit the timestamp and timings so that reports are reproducible.
    #[arg(long = "no-timestamp")]
    no_timestamp: bool,
}

impl DomainArgs {
    fn load(&self, height: Option<f64>) -> Result<DomainSpec> {
        let mut domain = match (&self.builtin, &self.file) {
            (Some(name), None) => {
                let mut params = BTreeMap::new();
                for (key, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("r", self.r), ("len", self.len)] {
                    if let Some(v) = v {
                        params.insert(key.to_string(), v);
                    }
                }
                if let Some(h) = height.or(self.height) {
                    params.insert("h".to_string(), h);
                }
                if self.centered {
                    params.insert("centered".to_string(), 1.0);
                }
                builtin_domain(&Builtin::from_name(name, &params)?)?
            }
            (None, Some(path)) => read_domain(path)?,
            (None, None) => return Err(Error::InvalidInput("one of --builtin or --file is required".into())),
            (Some(_), Some(_)) => return Err(Error::InvalidInput("--builtin and --file are exclusive".into())),
        };
        for &face in &self.dirichlet {
            domain = domain.with_bc(face, Bc::Dirichlet)?;
        }
        domain.validate()?;
        Ok(domain)
    }
}

impl RunArgs {
    fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(Error::InvalidInput(format!("--h must be positive, got {}", self.h)));
        }
        if self.levels == Some(0) {
            return Err(Error::InvalidInput("--levels must be at least 1".into()));
        }
        Ok(())
    }

    fn mesh(&self) -> MeshOptions {
        MeshOptions::new(self.h)
    }

    fn eig(&self, k: usize) -> EigOptions {
        EigOptions { k, seed: self.seed, ..EigOptions::default() }
    }

    fn stamp(&self, report: &mut Value) {
        if self.no_timestamp {
            return;
        }
        if let Value::Object(map) = report {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            map.insert("generated_unix".into(), json!(secs));
        }
    }
}

fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Writes the report to `out` (with CSV siblings), or to stdout.
fn emit(report: &Value, out: Option<&Path>, csv: &[(String, String)]) -> Result<()> {
    let text = to_json(report);
    match out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            for (name, body) in csv {
                write_atomic(&sibling(path, name), body.as_bytes())?;
            }
        }
        None => print_stdout(&format!("{text}\n"))?,
    }
    Ok(())
}

/// Like `print!`, but a closed pipe is not an error.
fn print_stdout(text: &str) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn classify(domain: &DomainArgs, h: Option<f64>, out: Option<&Path>) -> Result<u8> {
    let spec = domain.load(h)?;
    let verdict = is_lip(&spec, true)?;
    let symmetries = detect_symmetries(&spec)?;
    let mut report = json!({
        "schema": REPORT_SCHEMA,
        "command": "classify",
        "domain": spec.name,
        "dim": spec.dim,
        "lip": verdict,
        "symmetry_axes": symmetries.iter().map(|a| a + 1).collect::<Vec<_>>(),
    });
    let mut note = None;
    if !verdict.is_lip && symmetries.len() == spec.dim {
        let found = hotspots_core::verify::lip_orthant(&spec)?;
        let line = format!("lip orthant exists: {}", if found.is_some() { "yes" } else { "no" });
        report["lip_orthant"] = json!(found);
        report["note"] = json!(line);
        note = Some(line);
    }
    emit(&report, out, &[])?;
    if let Some(n) = note {
        eprintln!("{n}");
    }
    Ok(if verdict.is_lip { 0 } else { EXIT_NOT_LIP })
}

fn solve(domain: &DomainArgs, run: &RunArgs, k: usize, vector: bool) -> Result<u8> {
    run.validate()?;
    let spec = domain.load(None)?;
    let mesh = generate_mesh_with(&spec, &run.mesh())?;
    let sys = assemble_scalar_with(&mesh, Default::default())?;
    let k = k.clamp(1, sys.num_dofs());
    let scalar = solve_scalar_spectrum(&mesh, &sys, &run.eig(k))?;
    let mut csv = Vec::new();
    for (i, s) in scalar.iter().enumerate() {
        let mut body = String::from("# x y z psi\n");
        for (p, v) in mesh.vertices.iter().zip(&s.values) {
            body.push_str(&format!("{:.16e} {:.16e} {:.16e} {:.16e}\n", p[0], p[1], p[2], v));
        }
        csv.push((format!("psi{i}"), body));
    }
    let mut report = json!({
        "schema": REPORT_SCHEMA,
        "command": "solve",
        "domain": spec.name,
        "mesh": {"target_h": run.h, "h": mesh.h, "vertices": mesh.num_vertices(), "cells": mesh.num_cells()},
        "seed": run.seed,
        "scalar": {
            "eigenvalues": scalar.iter().map(|s| s.eigenvalue).collect::<Vec<_>>(),
            "residuals": scalar.iter().map(|s| s.residual).collect::<Vec<_>>(),
        },
    });
    if vector {
        let vsys = assemble_vector_with(&mesh, Default::default())?;
        let fields = solve_vector_spectrum(&vsys, &run.eig(k.min(vsys.num_dofs())))?;
        report["vector"] = json!({
            "eigenvalues": fields.iter().map(|f| f.eigenvalue).collect::<Vec<_>>(),
            "residuals": fields.iter().map(|f| f.residual).collect::<Vec<_>>(),
            "boundary_form_active": vsys.boundary_form_active(),
        });
        for (i, f) in fields.iter().enumerate() {
            csv.push((format!("eta{i}"), eigenfield_csv(&mesh, &f.values)));
        }
    }
    run.stamp(&mut report);
    emit(&report, run.out.as_deref(), &csv)?;
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn verify(
    domain: &DomainArgs,
    run: &RunArgs,
    suite: &str,
    k: Option<usize>,
    j: Option<usize>,
    tol_sign: Option<f64>,
    tol_zero: Option<f64>,
) -> Result<u8> {
    run.validate()?;
    let suite: Suite = suite.parse()?;
    let spec = domain.load(None)?;
    let mut cfg = SuiteConfig::new(run.h);
    cfg.mesh.scale = 1 << (run.levels.unwrap_or(1) - 1);
    cfg.k = k;
    cfg.eig.seed = run.seed;
    cfg.timings = !run.no_timestamp;
    if let Some(j) = j {
        if j == 0 || j > spec.dim {
            return Err(Error::InvalidInput(format!("--j must lie in 1..={}, got {j}", spec.dim)));
        }
        cfg.axis = Some(j - 1);
    }
    for (name, tol, slot) in [("--tol-sign", tol_sign, &mut cfg.sign_tol), ("--tol-zero", tol_zero, &mut cfg.zero_tol)] {
        if let Some(t) = tol {
            if !(t >= 0.0 && t < 1.0) {
                return Err(Error::InvalidInput(format!("{name} must lie in [0, 1), got {t}")));
            }
            *slot = t;
        }
    }
    let outcome = run_suite(&spec, suite, &cfg)?;
    let mut report = outcome.report;
    report["seed"] = json!(run.seed);
    run.stamp(&mut report);
    emit(&report, run.out.as_deref(), &outcome.csv)?;
    let mut summary = String::new();
    for c in &outcome.checks {
        let value = c.value.map(|v| format!(" value={v:.6e}")).unwrap_or_default();
        let tol = c.tolerance.map(|t| format!(" tol={t:.3e}")).unwrap_or_default();
        summary.push_str(&format!("{:<12} {}{value}{tol}  {}\n", status_word(c.status), c.name, c.detail));
    }
    summary.push_str(&format!("overall: {}\n", status_word(outcome.status)));
    if run.out.is_some() {
        print_stdout(&summary)?;
    } else {
        eprint!("{summary}");
    }
    Ok(match outcome.status {
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
        Status::Pass | Status::Info => 0,
    })
}

fn status_word(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Inconclusive => "INCONCLUSIVE",
        Status::Info => "INFO",
    }
}

/// Analytic first nontrivial eigenvalue for the builtins that have one.
fn known_value(spec: &DomainSpec, quantity: Quantity) -> Option<f64> {
    use std::f64::consts::PI;
    if spec.has_dirichlet() {
        return None;
    }
    let b = spec.builtin.as_ref()?;
    let mu2 = match b {
        Builtin::Rectangle { a, b, .. } => oracle::box_neumann(&[*a, *b], 4.0 * PI * PI / a.min(*b).powi(2)).get(1).copied(),
        Builtin::Box { a, b, c, .. } => {
            oracle::box_neumann(&[*a, *b, *c], 4.0 * PI * PI / a.min(*b).min(*c).powi(2)).get(1).copied()
        }
        Builtin::Disk { r } => Some((oracle::bessel_prime_zero(1, 1) / r).powi(2)),
        Builtin::Interval { len } => Some((PI / len).powi(2)),
        _ => None,
    }?;
    match quantity {
        Quantity::ScalarMu2 => Some(mu2),
        // on lip domains the bottom of the vector spectrum is the scalar one
        Quantity::VectorEta1 => matches!(b, Builtin::Rectangle { .. } | Builtin::Box { .. }).then_some(mu2),
    }
}

fn study(domain: &DomainArgs, run: &RunArgs, quantity: &str, oracle: Option<f64>, k: usize) -> Result<u8> {
    run.validate()?;
    let quantity = match quantity {
        "mu2" => Quantity::ScalarMu2,
        "eta1" => Quantity::VectorEta1,
        other => return Err(Error::InvalidInput(format!("unknown quantity '{other}' (known: mu2, eta1)"))),
    };
    let spec = domain.load(None)?;
    let reference = oracle.or_else(|| known_value(&spec, quantity));
    let levels = run.levels.unwrap_or(3);
    let result = convergence_study(&spec, quantity, &run.mesh(), levels, &run.eig(k), reference)?;
    let mut csv = String::from("# h value error order\n");
    for r in &result.rows {
        let f = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_else(|| "nan".into());
        csv.push_str(&format!("{:.16e} {:.16e} {} {}\n", r.h, r.value, f(r.error), f(r.order)));
    }
    let mut report = json!({
        "schema": REPORT_SCHEMA,
        "command": "study",
        "domain": spec.name,
        "seed": run.seed,
        "study": result,
    });
    run.stamp(&mut report);
    emit(&report, run.out.as_deref(), &[("convergence".to_string(), csv)])?;
    for r in &result.rows {
        let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
        eprintln!("h={:.5} value={:.10} order={order}", r.h, r.value);
    }
    Ok(0)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("HOTSPOTS_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("HOTSPOTS_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::InvalidInput("HOTSPOTS_THREADS must be at least 1".into()));
        }
        // a pool may already exist when embedded; the cap is best effort then
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    configure_threads()?;
    match &cli.command {
        Command::Classify { domain, h, out } => classify(domain, *h, out.as_deref()),
        Command::Solve { domain, run, k, vector } => solve(domain, run, *k, *vector),
        Command::Verify { domain, run, suite, k, j, tol_sign, tol_zero } => {
            verify(domain, run, suite, *k, *j, *tol_sign, *tol_zero)
        }
        Command::Study { domain, run, quantity, oracle, k } => study(domain, run, quantity, *oracle, *k),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
