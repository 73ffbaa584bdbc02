//! Acceptance checks. Prints one line per criterion and exits non-zero if
//! any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use hotspots_core::eigensolve::EigOptions;
use hotspots_core::fem_scalar::{assemble_scalar, solve_scalar_spectrum};
use hotspots_core::geometry::{builtin_domain, orthant_restriction, Bc, Builtin, DomainSpec};
use hotspots_core::mesh::{generate_mesh, refine};
use hotspots_core::verify::{
    convergence_study, run_suite, symmetric_pipeline, Direction, Quantity, Status, Suite, SuiteConfig,
    SymmetricOptions,
};
use serde_json::Value;

// ---------------------------------------------------------------------------
// Oracles

/// `J_n(x) = (1/π) ∫_0^π cos(nτ - x sin τ) dτ`; the trapezoid rule is
/// spectrally accurate for this periodic integrand.
fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        return if n % 2 == 0 { bessel_j(-n, x) } else { -bessel_j(-n, x) };
    }
    let m = 400;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let inner: f64 = (1..m).map(|i| f(i as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

fn bessel_j_prime(n: i32, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

/// k-th positive root of `f` (1-based), bracketed by scanning and refined by
/// bisection.
fn kth_root(f: impl Fn(f64) -> f64, k: usize) -> f64 {
    let (mut x, step) = (1e-3, 1e-2);
    let mut found = 0;
    loop {
        let (a, b) = (x, x + step);
        if f(a) * f(b) < 0.0 {
            found += 1;
            if found == k {
                let (mut lo, mut hi) = (a, b);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if f(lo) * f(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        x = b;
    }
}

/// Neumann eigenvalues of the unit disk below `max`, with multiplicity.
fn disk_neumann(max: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    for n in 0..8 {
        for k in 1..6 {
            let z = kth_root(|x| bessel_j_prime(n, x), k);
            if z * z <= max {
                out.extend(std::iter::repeat_n(z * z, if n == 0 { 1 } else { 2 }));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Neumann eigenvalues of the unit square or cube below `max`.
fn box_neumann(dim: usize, max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let r = 0..8i32;
    for i in r.clone() {
        for j in r.clone() {
            for k in if dim == 3 { r.clone() } else { 0..1 } {
                let v = PI * PI * (i * i + j * j + k * k) as f64;
                if v <= max {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

// ---------------------------------------------------------------------------
// Helpers

fn builtin(name: &str, params: &[(&str, f64)]) -> DomainSpec {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_domain(&Builtin::from_name(name, &p).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn suite(domain: &DomainSpec, s: Suite, h: f64) -> Value {
    let mut cfg = SuiteConfig::new(h);
    cfg.timings = false;
    run_suite(domain, s, &cfg).unwrap().report
}

fn check_status(report: &Value, prefix: &str) -> Vec<String> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["name"].as_str().unwrap().starts_with(prefix))
        .map(|c| c["status"].as_str().unwrap().to_string())
        .collect()
}

fn all_pass(report: &Value, prefix: &str) -> bool {
    let s = check_status(report, prefix);
    !s.is_empty() && s.iter().all(|x| x == "pass")
}

fn directions(verdict: &Value) -> Vec<String> {
    verdict["directions"].as_array().unwrap().iter().map(|d| d["direction"].as_str().unwrap().to_string()).collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// ---------------------------------------------------------------------------
// Criteria

fn square_oracle() -> Outcome {
    let t = Instant::now();
    let r = suite(&builtin("square", &[]), Suite::All, 1.0 / 64.0);
    let secs = t.elapsed().as_secs_f64();
    let mu2 = f(&r["scalar"]["mu2"]);
    let mult = r["scalar"]["mu2_multiplicity"].as_u64().unwrap_or(0);
    let err = rel(mu2, PI * PI);
    outcome(
        err <= 0.01 && mult == 2 && secs < 20.0,
        format!("mu2 = {mu2:.6} (rel err {err:.2e} <= 1e-2), multiplicity {mult} (2), runtime {secs:.1}s (< 20s)"),
    )
}

fn mixed_oracle() -> Outcome {
    let domain = builtin("square", &[]).with_bc(0, Bc::Dirichlet).unwrap();
    let r = suite(&domain, Suite::All, 1.0 / 64.0);
    let mu1 = f(&r["scalar"]["eigenvalues"][0]);
    let err = rel(mu1, PI * PI / 4.0);
    let dirs = directions(&r["trichotomy"][0]["verdict"]);
    let max = &r["hot_spots"][0]["verdict"]["max"];
    let x = f(&max["point"][0]);
    let pass = err <= 0.01
        && dirs == ["positive", "zero"]
        && (x - 1.0).abs() < 1e-12
        && max["on_boundary"] == true
        && all_pass(&r, "hot_spots");
    outcome(pass, format!("mu1 = {mu1:.6} (rel err {err:.2e} <= 1e-2), trichotomy {dirs:?}, hot-spot max at x = {x}"))
}

fn cube_oracle() -> Outcome {
    let r = suite(&builtin("cube", &[]), Suite::All, 1.0 / 12.0);
    let mu2 = f(&r["scalar"]["mu2"]);
    let mult = r["scalar"]["mu2_multiplicity"].as_u64().unwrap_or(0);
    let eta1 = f(&r["comparison"]["eta1"]);
    let tau1 = f(&r["comparison"]["tau1"]);
    let (e_mu, e_eta, e_tau) = (rel(mu2, PI * PI), rel(eta1, mu2), rel(tau1, 2.0 * PI * PI));
    let pass = e_mu <= 0.03 && mult == 3 && e_eta <= 0.03 && e_tau <= 0.07 && tau1 - mu2 > 0.0;
    outcome(
        pass,
        format!(
            "mu2 = {mu2:.5} ({e_mu:.2e} <= 3e-2), mult {mult}, eta1 = {eta1:.5} ({e_eta:.2e} <= 3e-2), \
             tau1 = {tau1:.4} ({e_tau:.2e} <= 7e-2), tau1 - mu2 = {:.4}",
            tau1 - mu2
        ),
    )
}

fn disk_oracle() -> Outcome {
    let r = suite(&builtin("disk", &[("r", 1.0)]), Suite::All, 0.05);
    let j11p = kth_root(|x| bessel_j_prime(1, x), 1);
    let j01 = kth_root(|x| bessel_j(0, x), 1);
    let mu2 = f(&r["scalar"]["mu2"]);
    let e_mu = rel(mu2, j11p * j11p);
    let divfree: Vec<f64> = r["vector"]["classified"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["classification"]["class"]["type"] == "DivFreeType")
        .map(|c| f(&c["eigenvalue"]))
        .collect();
    let best = divfree.iter().map(|&v| rel(v, j01 * j01)).fold(f64::INFINITY, f64::min);
    let active = r["vector"]["boundary_form_active"] == true && f(&r["vector"]["boundary_form_size"]) > 0.0;
    outcome(
        e_mu <= 0.02 && best <= 0.03 && active,
        format!(
            "mu2 = {mu2:.5} vs {:.5} ({e_mu:.2e} <= 2e-2), div-free within {best:.2e} of {:.5} (<= 3e-2), boundary form active: {active}",
            j11p * j11p,
            j01 * j01
        ),
    )
}

fn double_prism() -> Outcome {
    let classify = Command::new(env!("CARGO_BIN_EXE_hotspots"))
        .args(["classify", "--builtin", "double-prism"])
        .output()
        .unwrap();
    let code = classify.status.code();
    let r = suite(&builtin("double-prism", &[]), Suite::All, 0.08);
    let first = r["scalar"]["first_index"].as_u64().unwrap() as usize;
    let mult = r["scalar"]["mu2_multiplicity"].as_u64().unwrap() as usize;
    let tri = r["trichotomy"].as_array().unwrap();
    let no_mixed = tri.len() == mult && tri.iter().all(|t| !directions(&t["verdict"]).iter().any(|d| d == "mixed"));
    let hs = all_pass(&r, "hot_spots") && check_status(&r, "hot_spots").len() == mult;
    let gap = f(&r["comparison"]["gap"]);
    let dirs: Vec<Vec<String>> = tri.iter().map(|t| directions(&t["verdict"])).collect();
    outcome(
        code == Some(0) && no_mixed && hs && gap <= 0.02 && first == 1,
        format!("classify exit {code:?}, trichotomy {dirs:?}, hot spots pass: {hs}, gap {gap:.2e} (<= 2e-2)"),
    )
}

fn symmetric() -> Outcome {
    let oct = builtin("octahedron", &[("a", 2.0), ("b", 2.0), ("h", 1.0)]);
    let r = symmetric_pipeline(&oct, 2, &SymmetricOptions::new(0.1)).unwrap();
    let no_mixed = !r.orthant_trichotomy.has_mixed();
    let hs = r.reconstruction_hot_spots.pass;

    let disk = builtin("disk", &[("r", 1.0)]);
    let d = symmetric_pipeline(&disk, 1, &SymmetricOptions::new(0.05)).unwrap();
    // sign of ∂₁ψ per quadrant, counterclockwise from (+, +)
    let sign_of = |q: [i8; 2]| {
        d.orthant_signs.iter().find(|o| o.orthant == q).map(|o| o.directions.directions[0].direction)
    };
    let quads = [[1, 1], [-1, 1], [-1, -1], [1, -1]].map(sign_of);
    let definite = quads.iter().all(|s| matches!(s, Some(Direction::Positive) | Some(Direction::Negative)));
    let pattern = definite && quads[0] == quads[2] && quads[1] == quads[3] && quads[0] != quads[1];
    outcome(
        r.agreement <= 0.01 && no_mixed && hs && pattern,
        format!(
            "octahedron agreement {:.2e} (<= 1e-2), orthant trichotomy {:?}, hot spots pass: {hs}; disk quadrants I-IV {quads:?}",
            r.agreement,
            r.orthant_trichotomy.pattern()
        ),
    )
}

fn property_suite() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;
    let mut record = |ok: bool, s: String| {
        pass &= ok;
        notes.push(s);
    };

    // symmetry, orthonormality, residuals
    let mut sym: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    let mut res: f64 = 0.0;
    for domain in [builtin("square", &[]), builtin("cube", &[]), builtin("double-prism", &[]), builtin("disk", &[])] {
        let mesh = generate_mesh(&domain, if domain.dim == 2 { 1.0 / 32.0 } else { 0.125 }).unwrap();
        let sys = assemble_scalar(&mesh).unwrap();
        sym = sym.max(sys.stiffness.symmetry_error()).max(sys.mass.symmetry_error());
        let spec = hotspots_core::eigensolve::smallest_eigs(&sys.stiffness, &sys.mass, &EigOptions::with_k(6)).unwrap();
        res = res.max(spec.max_residual());
        for i in 0..spec.len() {
            for j in 0..spec.len() {
                let g = hotspots_core::sparse::m_inner(&sys.mass, &spec.vectors[i], &spec.vectors[j]);
                ortho = ortho.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    record(sym <= 1e-14, format!("symmetry {sym:.1e}"));
    record(ortho <= 1e-8, format!("M-orthonormality {ortho:.1e}"));
    record(res <= 1e-9, format!("residual {res:.1e}"));

    // Galerkin monotonicity under nested refinement
    let mut mono = true;
    for (domain, h) in [(builtin("square", &[]), 0.125), (builtin("cube", &[]), 0.25)] {
        let coarse = generate_mesh(&domain, h).unwrap();
        let fine = refine(&coarse);
        let solve = |m: &hotspots_core::mesh::Mesh| {
            let s = assemble_scalar(m).unwrap();
            solve_scalar_spectrum(m, &s, &EigOptions::with_k(6)).unwrap()
        };
        let (c, fi) = (solve(&coarse), solve(&fine));
        let exact = box_neumann(domain.dim, 1e9);
        for i in 1..6 {
            mono &= exact[i] <= fi[i].eigenvalue && fi[i].eigenvalue <= c[i].eigenvalue * (1.0 + 1e-12);
        }
    }
    record(mono, format!("monotone: {mono}"));

    // convergence orders
    for (domain, h) in [(builtin("square", &[]), 0.125), (builtin("cube", &[]), 0.25)] {
        let study = convergence_study(
            &domain,
            Quantity::ScalarMu2,
            &hotspots_core::mesh::MeshOptions::new(h),
            3,
            &EigOptions::with_k(4),
            Some(PI * PI),
        )
        .unwrap();
        let orders = study.orders();
        let ok = !orders.is_empty() && orders.iter().all(|p| (1.8..=2.2).contains(p));
        record(ok, format!("{} orders {:?}", domain.name, orders.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>()));
    }

    // byte-identical reports
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_hotspots"))
            .args(["verify", "--builtin", "double-prism", "--h", "0.1", "--no-timestamp", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        (o.status.code(), std::fs::read(&out).unwrap_or_default())
    };
    let (a, b) = (run("a.json"), run("b.json"));
    record(a.0 == Some(0) && !a.1.is_empty() && a == b, format!("deterministic: {} (exit {:?})", a == b, a.0));
    outcome(pass, notes.join(", "))
}

fn inclusion() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let cases = [
        (builtin("square", &[]), 1.0 / 32.0),
        (builtin("disk", &[("r", 1.0)]), 0.05),
        (builtin("cube", &[]), 1.0 / 8.0),
    ];
    for (domain, h) in cases {
        let r = suite(&domain, Suite::Spectral, h);
        let mu2 = f(&r["scalar"]["mu2"]);
        let exact = if domain.name.starts_with("disk") {
            disk_neumann(6.0 * mu2)
        } else {
            box_neumann(domain.dim, 6.0 * mu2)
        };
        // independent count of the discrete eigenvalues up to the cutoff
        let mesh = generate_mesh(&domain, h).unwrap();
        let sys = assemble_scalar(&mesh).unwrap();
        let k = exact.len() + 4;
        let own = solve_scalar_spectrum(&mesh, &sys, &EigOptions::with_k(k)).unwrap();
        let expected = own.iter().filter(|m| m.eigenvalue > 1e-8 && m.eigenvalue <= 4.0 * mu2).count();
        let entries = r["spectral_inclusion"]["entries"].as_array().unwrap();
        let mut worst: f64 = 0.0;
        let mut ok = entries.len() == expected;
        for e in entries {
            let n = e["index"].as_u64().unwrap() as usize;
            // per-level tolerance: three times the scalar discretization error
            let tol = 3.0 * rel(f(&e["mu"]), exact[n]);
            let d = f(&e["relative_difference"]);
            let mismatch = f(&e["mismatch"]);
            ok &= d <= tol && mismatch <= 0.05;
            worst = worst.max(d / tol);
        }
        pass &= ok;
        notes.push(format!("{}: {}/{expected} matched, worst diff/tol {worst:.2e}", domain.name, entries.len()));
    }
    outcome(pass, notes.join("; "))
}

fn sign_property() -> Outcome {
    let cases = [
        (builtin("square", &[]), 1.0 / 32.0),
        (builtin("square", &[]).with_bc(0, Bc::Dirichlet).unwrap(), 1.0 / 32.0),
        (builtin("rectangle", &[("a", 1.0), ("b", 2.0)]), 1.0 / 16.0),
        (builtin("cube", &[]), 1.0 / 8.0),
        (builtin("box", &[("a", 1.0), ("b", 1.5), ("c", 1.0)]), 1.0 / 8.0),
        (builtin("double-prism", &[]), 0.1),
        (builtin("double-prism-truncated", &[("c", 0.5)]), 0.1),
        (builtin("parallelogram", &[]), 0.05),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for (domain, h) in cases {
        let r = suite(&domain, Suite::Spectral, h);
        let s = check_status(&r, "sign_property");
        let ok = !s.is_empty() && s.iter().all(|x| x == "pass");
        pass &= ok;
        notes.push(format!("{} {}", domain.name, if ok { "ok" } else { "FAIL" }));
    }
    outcome(pass, notes.join(", "))
}

/// Quarter disk with Neumann data on every side.
fn disk_quadrant() -> DomainSpec {
    let mut q = orthant_restriction(&builtin("disk", &[("r", 1.0)]), &[1, 1], 0).unwrap();
    for face in 0..q.face_count() {
        q = q.with_bc(face, Bc::Neumann).unwrap();
    }
    q
}

/// Properties that accompany the criteria: the comparison of η₁ and μ₂ with
/// a positive margin of the divergence-free part, and the symmetric square.
fn invariants() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    let cases = [
        (builtin("square", &[]), 1.0 / 32.0),
        (builtin("rectangle", &[("a", 1.0), ("b", 2.0)]), 1.0 / 16.0),
        (builtin("box", &[("a", 1.0), ("b", 1.5), ("c", 1.0)]), 1.0 / 8.0),
        (builtin("double-prism", &[]), 0.08),
        (disk_quadrant(), 0.05),
    ];
    for (domain, h) in cases {
        let r = suite(&domain, Suite::All, h);
        let gap = f(&r["comparison"]["gap"]);
        let margin = f(&r["comparison"]["margin"]);
        let ok = gap <= 0.02 && margin > 0.2 && r["summary"]["status"] != "fail";
        pass &= ok;
        notes.push(format!("{} gap {gap:.1e} margin {margin:.3}", domain.name));
    }
    let lip = [
        (builtin("square", &[]), 1.0 / 32.0),
        (builtin("rectangle", &[("a", 1.0), ("b", 2.0)]), 1.0 / 16.0),
        (builtin("cube", &[]), 1.0 / 8.0),
        (builtin("box", &[("a", 1.0), ("b", 1.5), ("c", 1.0)]), 1.0 / 8.0),
        (builtin("double-prism-shifted", &[("c", 0.5)]), 0.1),
        (builtin("double-prism-truncated", &[("c", 0.5)]), 0.1),
        (builtin("parallelogram", &[]), 0.05),
        (builtin("interval", &[]), 0.02),
    ];
    let mut scalar_ok = true;
    for (domain, h) in lip {
        for s in [Suite::Trichotomy, Suite::Hotspots] {
            let r = suite(&domain, s, h);
            let prefix = if s == Suite::Trichotomy { "trichotomy" } else { "hot_spots" };
            scalar_ok &= all_pass(&r, prefix);
        }
    }
    pass &= scalar_ok;
    notes.push(format!("lip builtins trichotomy and hot spots: {scalar_ok}"));
    let sq = builtin("square", &[("centered", 1.0), ("a", 2.0)]);
    let s = symmetric_pipeline(&sq, 0, &SymmetricOptions::new(1.0 / 16.0)).unwrap();
    pass &= s.agreement <= 1e-9 && s.status == Status::Pass;
    notes.push(format!("square reduction agreement {:.1e} (<= 1e-9)", s.agreement));
    let l = suite(&builtin("lshape", &[]), Suite::All, 0.1);
    let info = check_status(&l, "trichotomy").iter().all(|s| s == "info") && l["hypotheses_satisfied"] == false;
    pass &= info;
    notes.push(format!("L-shape informational: {info}"));
    outcome(pass, notes.join("; "))
}

type Criterion = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("1 square oracle", square_oracle),
        ("2 mixed boundary oracle", mixed_oracle),
        ("3 cube", cube_oracle),
        ("4 disk", disk_oracle),
        ("5 double prism", double_prism),
        ("6 symmetric reduction", symmetric),
        ("7 property suite", property_suite),
        ("8 spectral inclusion", inclusion),
        ("9 first eigenfield sign", sign_property),
        ("invariants", invariants),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t = Instant::now();
        let o = run();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {name}: {} ({:.1}s) {}",
            if o.pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
