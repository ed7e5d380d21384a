use std::path::Path;
use std::process::{Command, Output};

fn stark(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stark"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stark_m = write(d, "a.json", r#"{"n":1,"basis":"standard","entries":[[1,0,0],[0,-1,0],[0,0,0]]}"#);
    let plain = write(d, "b.json", r#"{"n":1,"basis":"standard","entries":[[1,0,0],[0,1,0],[0,0,0]]}"#);
    let wrong = write(d, "c.json", r#"{"n":1,"basis":"standard","entries":[[1,0],[0,1]]}"#);
    let junk = write(d, "d.json", "not json");

    let o = stark(&["check", &stark_m], d);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("stark: true"));

    let o = stark(&["check", &plain], d);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("austere: false"));

    // restricting the checks to the lift identity alone passes
    assert_eq!(stark(&["check", &plain, "--checks", "lift"], d).status.code(), Some(0));
    assert_eq!(stark(&["check", &wrong], d).status.code(), Some(2));
    assert_eq!(stark(&["check", &junk], d).status.code(), Some(2));
    assert_eq!(stark(&["check", "missing.json"], d).status.code(), Some(2));
    assert_eq!(stark(&["bogus"], d).status.code(), Some(2));
}

#[test]
fn check_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let m = write(d, "zero.json", r#"{"n":1,"basis":"standard","entries":[[0,0,0],[0,0,0],[0,0,0]]}"#);
    let o = stark(&["check", &m, "--json", "out.json"], d);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("out.json")).unwrap()).unwrap();
    assert_eq!(v["austere"], true);
    assert_eq!(v["stark"], true);
    assert_eq!(v["passed"], true);
}

#[test]
fn canon_reports_kind() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let m = write(d, "a.json", r#"{"n":1,"basis":"standard","entries":[[1,0,0],[0,-1,0],[0,0,0]]}"#);
    let o = stark(&["canon", &m, "--out", "canon.json"], d);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("canon.json")).unwrap()).unwrap();
    assert_eq!(v["kind"], "reducible");
    assert_eq!(v["k"], 1);
    assert_eq!(v["l"], 0);

    let plain = write(d, "b.json", r#"{"n":1,"basis":"standard","entries":[[1,0,0],[0,1,0],[0,0,-2]]}"#);
    assert_eq!(stark(&["canon", &plain], d).status.code(), Some(1));
}

#[test]
fn flow_csv_and_region_exit() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = stark(&["flow", "--x-max", "0.05", "--y-max", "0.05", "--flow-out", "f.csv"], d);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(d.join("f.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "x,y,t,u,v,beta,mu,kappa,C,D,ratio");
    assert_eq!(text.lines().count(), 1 + 51 * 51);

    let o = stark(&["flow", "--x-max", "5"], d);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("outside the valid region"));

    let cfg = write(d, "bad.json", r#"{"step": 0.001, "unknown_key": 1}"#);
    assert_eq!(stark(&["flow", "--config", &cfg], d).status.code(), Some(2));
}

#[test]
fn construct_is_deterministic_and_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let cfg = write(d, "cfg.json", r#"{"x_max": 0.04, "y_max": 0.04, "grid_step": 0.01, "s_count": 8}"#);
    let mut runs = Vec::new();
    for i in 0..2 {
        let (p, g, r) = (format!("p{i}.csv"), format!("g{i}.csv"), format!("r{i}.json"));
        let o = stark(
            &["construct", "--config", &cfg, "--points-out", &p, "--grid-out", &g, "--report-out", &r],
            d,
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push([p, g, r].map(|f| std::fs::read(d.join(f)).unwrap()));
    }
    assert_eq!(runs[0], runs[1]);
    let points = String::from_utf8(runs[0][0].clone()).unwrap();
    assert_eq!(points.lines().count(), 1 + 25 * 8);
    let report: serde_json::Value = serde_json::from_slice(&runs[0][2]).unwrap();
    assert_eq!(report["closure"].as_array().unwrap().len(), 25);
    assert_eq!(report["passed"], true);
}

#[test]
fn construct_failure_leaves_no_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = stark(&["construct", "--x-max", "5", "--grid-step", "0.1"], d);
    assert_eq!(o.status.code(), Some(3));
    assert!(!d.join("points.csv").exists());
    assert!(!d.join("report.json").exists());
}

#[test]
fn helix_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let o = stark(&["helix", "--beta", "3", "--mu", "0", "--kappa", "0", "--out", "h.json"], d);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(d.join("h.json")).unwrap()).unwrap();
    assert_eq!(v["closed"], true);
    assert!((v["L"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-12);

    assert_eq!(stark(&["helix", "--beta", "0", "--mu", "1", "--kappa", "1"], d).status.code(), Some(2));

    let o = stark(&["verify"], d);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 5);
}
