use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newton-dual")).current_dir(dir).args(args).output().expect("binary runs")
}

fn error_json(out: &Output) -> Value {
    assert!(!out.status.success());
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.trim().lines().last().unwrap()).expect("error is JSON")
}

#[test]
fn newton_radial_profile_starts_at_the_front_edge() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["newton-radial", "--x0", "1", "--M", "1", "--emit", "profile.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rd = csv::Reader::from_path(dir.path().join("profile.csv")).unwrap();
    assert_eq!(rd.headers().unwrap(), vec!["v", "x", "u"]);
    let first = rd.records().next().unwrap().unwrap();
    assert_eq!(first[0].parse::<f64>().unwrap(), 1.0);
    assert_eq!(first[2].parse::<f64>().unwrap(), 0.0);
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("profile.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["versions"]["newton-dual"], env!("CARGO_PKG_VERSION"));
    assert!(meta["tolerances"].is_object());
}

#[test]
fn seeded_commands_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for args in [
        &["duality-check", "--bodies", "12", "--seed", "7", "--emit", "out.csv"][..],
        &["tilde-check", "--bodies", "6", "--seed", "3", "--emit", "t.csv"][..],
        &["heel-audit", "--m", "3", "--M", "0.9", "--trials", "20", "--seed", "5", "--emit", "audit.json"][..],
    ] {
        assert!(run(a.path(), args).status.success());
        assert!(run(b.path(), args).status.success());
        let out = args[args.len() - 1];
        for f in [out.to_string(), format!("{out}.meta.json")] {
            assert_eq!(std::fs::read(a.path().join(&f)).unwrap(), std::fs::read(b.path().join(&f)).unwrap(), "{f}");
        }
    }
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(a.path().join("out.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 7);
    assert!(meta["results"]["max_rel_gap"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn heel_sweep_has_transition_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["heel-sweep", "--M", "1.0:1.4:0.2", "--m-max", "8", "--emit", "sweep.csv"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let crit = text.lines().find(|l| l.contains("M_crit")).expect("M_crit row");
    let m: f64 = crit.split(',').next().unwrap().parse().unwrap();
    assert!((m - 1.1795).abs() < 1e-3, "{m}");
    assert_eq!(text.lines().count(), 1 + 3 + 1);
}

#[test]
fn errors_are_machine_readable() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(error_json(&run(dir.path(), &["newton-radial", "--M", "-1"]))["error"], "invalid_input");
    assert_eq!(error_json(&run(dir.path(), &["heel-sweep", "--M", "2:1:0.1"]))["error"], "invalid_input");
    assert_eq!(error_json(&run(dir.path(), &["no-such-command"]))["error"], "usage");
    // v'(0+) = 0 gives a non-convex dual profile at M = 2.
    assert_eq!(error_json(&run(dir.path(), &["maxwell-body", "--M", "2", "--v0p", "0", "--rim", "90"]))["error"], "not_in_class");
}

#[test]
fn maxwell_commands_emit_curve_and_body() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["maxwell-solve", "--M", "2", "--v0p", "0.8", "--step", "4e-3", "--emit", "c.csv"]).status.success());
    let text = std::fs::read_to_string(dir.path().join("c.csv")).unwrap();
    assert!(text.starts_with("p1,v,dv\n"));
    let out = run(dir.path(), &["maxwell-body", "--M", "2", "--v0p", "0.8", "--rim", "180", "--emit", "b.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let body = newton_dual::io::read_body(&dir.path().join("b.json")).unwrap();
    assert!(matches!(body, newton_dual::io::LoadedBody::Poly(_)));
    let summary: Value = serde_json::from_slice(&out.stdout).unwrap();
    let (d, p) = (summary["dual"]["value"].as_f64().unwrap(), summary["primal"]["value"].as_f64().unwrap());
    assert!((d - p).abs() < 2e-3 * d);
}

#[test]
fn accept_runs_selected_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["accept", "--criteria", "2,4,12", "--emit", "a.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let all: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.json")).unwrap()).unwrap();
    assert_eq!(all.as_array().unwrap().len(), 3);
    assert!(all.as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(error_json(&run(dir.path(), &["accept", "--criteria", "13"]))["error"], "invalid_input");
}
