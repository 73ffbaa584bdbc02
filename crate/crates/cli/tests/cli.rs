use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hotspots(args: &[&str]) -> Output {
    hotspots_env(args, &[])
}

fn hotspots_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hotspots"));
    cmd.args(args).env_remove("HOTSPOTS_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is a JSON report")
}

#[test]
fn classify_exit_codes() {
    let o = hotspots(&["classify", "--builtin", "double-prism"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["lip"]["is_lip"], true);

    let o = hotspots(&["classify", "--builtin", "octahedron", "--a", "2", "--b", "2", "--h", "1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("lip orthant exists: yes"));
    assert_eq!(json(&o)["symmetry_axes"], serde_json::json!([1, 2, 3]));

    assert_eq!(code(&hotspots(&["classify", "--builtin", "disk"])), 2);
}

#[test]
fn malformed_inputs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dom");
    fs::write(&bad, "dim 2\nvertex 0 0\nvertex 1 0\nvertex 1 1\nface 0 1\nface 1 2\nface 2 0\nsomething else\n").unwrap();
    let o = hotspots(&["classify", "--file", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 8"), "{}", stderr(&o));

    let missing = dir.path().join("missing.dom");
    assert_eq!(code(&hotspots(&["classify", "--file", missing.to_str().unwrap()])), 1);
    assert_eq!(code(&hotspots(&["classify", "--builtin", "sphere"])), 1);
    assert_eq!(code(&hotspots(&["verify", "--builtin", "square", "--bogus"])), 1);
    assert_eq!(code(&hotspots(&["verify", "--builtin", "square", "--h", "-1"])), 1);
    assert_eq!(code(&hotspots(&["verify", "--builtin", "square", "--j", "3"])), 1);
    assert_eq!(code(&hotspots(&["verify", "--builtin", "square", "--suite", "nope"])), 1);
    assert_eq!(code(&hotspots(&["verify", "--builtin", "square", "--tol-sign", "1.5"])), 1);
    assert_eq!(code(&hotspots(&["--help"])), 0);
}

#[test]
fn file_domain_is_classified() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tri.dom");
    // diamond: no reflection makes all four diagonal normals opposite-signed
    fs::write(&path, "dim 2\nvertex 1 0\nvertex 0 1\nvertex -1 0\nvertex 0 -1\nface 0 1\nface 1 2\nface 2 3\nface 3 0\n").unwrap();
    assert_eq!(code(&hotspots(&["classify", "--file", path.to_str().unwrap()])), 2);
    // hypotenuse normal along (1, 1): lip after reflecting x
    fs::write(&path, "dim 2\nvertex 0 0\nvertex 1 0\nvertex 0 1\nface 0 1\nface 1 2\nface 2 0\n").unwrap();
    let o = hotspots(&["classify", "--file", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["lip"]["rotation_applied"]["kind"], "permutation_reflection");
}

#[test]
fn verify_writes_reproducible_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = hotspots(&[
            "verify", "--builtin", "double-prism", "--suite", "hotspots", "--h", "0.2", "--no-timestamp", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        assert!(String::from_utf8_lossy(&o.stdout).contains("overall: PASS") || String::from_utf8_lossy(&o.stdout).contains("overall: pass"));
        fs::read(&out).unwrap()
    };
    let a = run("a.json");
    let b = run("b.json");
    assert_eq!(a, b);
    let report: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(report["schema"], "hotspots-report/1");
    assert!(report.get("generated_unix").is_none());
    assert!(dir.path().join("a.psi2.csv").exists());
    // no temporary files are left behind
    let names: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.iter().all(|n| n.ends_with(".json") || n.ends_with(".csv")), "{names:?}");
}

#[test]
fn timestamp_is_added_by_default() {
    let o = hotspots(&["solve", "--builtin", "square", "--h", "0.25", "--k", "3"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["generated_unix"].as_u64().unwrap() > 0);
    let mu = r["scalar"]["eigenvalues"].as_array().unwrap();
    assert_eq!(mu.len(), 3);
    assert!(mu[0].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["verify", "--builtin", "box", "--suite", "curlcurl", "--h", "0.25", "--no-timestamp"];
    let one = hotspots_env(&args, &[("HOTSPOTS_THREADS", "1")]);
    let two = hotspots_env(&args, &[("HOTSPOTS_THREADS", "2")]);
    assert_eq!(code(&one), 0, "{}", stderr(&one));
    assert_eq!(one.stdout, two.stdout);
    assert_eq!(code(&hotspots_env(&args, &[("HOTSPOTS_THREADS", "0")])), 1);
    assert_eq!(code(&hotspots_env(&args, &[("HOTSPOTS_THREADS", "many")])), 1);
}

#[test]
fn off_hypothesis_domain_is_not_a_failure() {
    let o = hotspots(&["verify", "--builtin", "lshape", "--h", "0.1", "--no-timestamp"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&o)["hypotheses_satisfied"], false);
    // too coarse to resolve a divergence-free field within the k budget
    let o = hotspots(&["verify", "--builtin", "lshape", "--h", "0.2", "--no-timestamp"]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    assert!(stderr(&o).contains("overall: INCONCLUSIVE"));
}

#[test]
fn study_writes_a_convergence_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("study.json");
    let o = hotspots(&[
        "study", "--builtin", "square", "--h", "0.125", "--levels", "3", "--no-timestamp", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let table = fs::read_to_string(Path::new(&dir.path().join("study.convergence.csv"))).unwrap();
    assert_eq!(table.lines().count(), 4);
    let r: Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    for row in r["study"]["rows"].as_array().unwrap().iter().skip(1) {
        let order = row["order"].as_f64().unwrap();
        assert!((1.8..=2.2).contains(&order), "order {order}");
    }
}
