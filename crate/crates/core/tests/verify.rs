use std::collections::BTreeMap;
use std::f64::consts::PI;

use hotspots_core::eigensolve::EigOptions;
use hotspots_core::fem_scalar::{assemble_scalar, solve_scalar_spectrum};
use hotspots_core::geometry::{builtin_domain, Builtin, DomainSpec};
use hotspots_core::mesh::generate_mesh;
use hotspots_core::verify::{
    check_hot_spots, check_trichotomy, compare_eta1_mu2, run_suite, symmetric_pipeline, to_json, Direction, Status, Suite,
    SuiteConfig, SymmetricOptions,
};
use hotspots_core::Error;

fn builtin(name: &str, params: &[(&str, f64)]) -> DomainSpec {
    let p: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    builtin_domain(&Builtin::from_name(name, &p).unwrap()).unwrap()
}

#[test]
fn rectangle_hot_spots_sit_on_the_short_sides() {
    let domain = builtin("rectangle", &[("a", 1.0), ("b", 2.0)]);
    let mesh = generate_mesh(&domain, 1.0 / 16.0).unwrap();
    let sys = assemble_scalar(&mesh).unwrap();
    let spec = solve_scalar_spectrum(&mesh, &sys, &EigOptions::with_k(3)).unwrap();
    // ψ₂ = cos(πy/2), μ₂ = π²/4
    assert!((spec[1].eigenvalue - PI * PI / 4.0).abs() < 0.01 * PI * PI / 4.0);
    let v = check_hot_spots(&mesh, &spec[1].values, spec[1].eigenvalue).unwrap();
    assert!(v.pass);
    for e in [&v.max, &v.min] {
        assert!(e.on_boundary);
        assert!(e.point[1].abs() < 1e-12 || (e.point[1] - 2.0).abs() < 1e-12, "{:?}", e.point);
    }
    let t = check_trichotomy(2, &spec[1].gradients, 5e-3, 1e-6, true);
    assert_eq!(t.pattern()[1], Direction::Positive);
}

#[test]
fn constant_mode_is_rejected() {
    let mesh = generate_mesh(&builtin("square", &[]), 0.25).unwrap();
    let ones = vec![1.0; mesh.num_vertices()];
    assert!(matches!(check_hot_spots(&mesh, &ones, 0.0), Err(Error::Precondition(_))));
}

#[test]
fn trichotomy_on_synthetic_samples() {
    let samples: Vec<[f64; 3]> = (1..20).map(|i| [i as f64, 0.0, -(i as f64) * 0.5]).collect();
    let v = check_trichotomy(3, &samples, 5e-3, 1e-6, true);
    assert_eq!(v.pattern(), vec![Direction::Positive, Direction::Zero, Direction::Negative]);
    assert!(!v.has_mixed());
    let flipped: Vec<[f64; 3]> = samples.iter().map(|s| [-s[0], s[1], -s[2]]).collect();
    let w = check_trichotomy(3, &flipped, 5e-3, 1e-6, true);
    assert!(w.sign_flipped);
    assert_eq!(w.pattern(), v.pattern());
    let mut mixed = samples.clone();
    mixed[3][0] = -5.0;
    assert!(check_trichotomy(3, &mixed, 5e-3, 1e-6, true).has_mixed());
}

#[test]
fn missing_divergence_free_field_is_inconclusive() {
    let c = compare_eta1_mu2(PI * PI, &[], 0.02, 0.0);
    assert_eq!(c.status, Status::Inconclusive);
}

#[test]
fn centred_square_reduction_agrees() {
    let domain = builtin("square", &[("centered", 1.0), ("a", 2.0)]);
    let r = symmetric_pipeline(&domain, 0, &SymmetricOptions::new(1.0 / 8.0)).unwrap();
    // first antisymmetric mode in x is sin(πx/2) on [-1, 1]
    assert!((r.half_eigenvalue - PI * PI / 4.0).abs() < 0.01 * PI * PI / 4.0);
    assert!(r.agreement < 1e-8);
    assert_eq!(r.status, Status::Pass);
    assert_eq!(r.orthant_trichotomy.pattern()[1], Direction::Zero);
}

#[test]
fn symmetric_suite_needs_a_symmetric_domain() {
    let err = run_suite(&builtin("square", &[]), Suite::Symmetric, &SuiteConfig::new(0.25)).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn suite_reports_are_reproducible() {
    let mut cfg = SuiteConfig::new(0.2);
    cfg.timings = false;
    let domain = builtin("double-prism", &[]);
    let a = run_suite(&domain, Suite::Hotspots, &cfg).unwrap();
    let b = run_suite(&domain, Suite::Hotspots, &cfg).unwrap();
    assert_eq!(to_json(&a.report), to_json(&b.report));
    assert_eq!(a.report["schema"], "hotspots-report/1");
    assert_eq!(a.status, Status::Pass);
}

#[test]
fn suite_names_parse() {
    for s in ["hotspots", "hot-spots", "trichotomy", "spectral", "symmetric", "curlcurl", "curl-curl", "all"] {
        let suite: Suite = s.parse().unwrap();
        assert_eq!(suite.to_string().replace('-', ""), s.replace('-', ""));
    }
    assert!("everything".parse::<Suite>().is_err());
}
