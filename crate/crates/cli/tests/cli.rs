use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_simplexgeo"));
    c.env_remove("SIMPLEXGEO_SEED");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn flow_example_writes_monotone_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("flow.csv");
    let o = run(&[
        "flow",
        "--dim",
        "8",
        "--c",
        "geometric:0.5",
        "--p0",
        "uniform",
        "--t-max",
        "10",
        "--dt",
        "0.01",
        "--method",
        "closed",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("flow N=8"));

    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 11);
    assert_eq!(
        (header[0], header[1], header[8], header[9], header[10]),
        ("t", "p_0", "p_7", "objective", "residual_l1")
    );
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 1001);
    for w in rows.windows(2) {
        assert!(w[1][9] >= w[0][9], "objective decreased at t={}", w[1][0]);
    }
    assert_eq!(rows[1000][0], 10.0);
}

#[test]
fn rk4_flow_agrees_with_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (m, p) in [("closed", &a), ("rk4", &b)] {
        let o = run(&[
            "flow",
            "--dim",
            "4",
            "--c",
            "explicit:1,0.3,-0.2,0.5",
            "--t-max",
            "2",
            "--dt",
            "0.001",
            "--method",
            m,
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let last = |p: &std::path::Path| -> Vec<f64> {
        let s = std::fs::read_to_string(p).unwrap();
        s.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect()
    };
    let (x, y) = (last(&a), last(&b));
    let err: f64 = (1..5).map(|i| (x[i] - y[i]).abs()).sum();
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn check_all_passes() {
    let o = run(&["check-all", "--dim", "16", "--seed", "7"]);
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 10);
    assert!(stdout.lines().last().unwrap().starts_with("check-all N=16"));
}

#[test]
fn missing_dim_is_config_error() {
    let o = run(&["flow", "--c", "geometric:0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--dim"));
    let o = run(&["check-all"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_specs_are_config_errors() {
    for args in [
        vec!["flow", "--dim", "3", "--c", "geometric:1.5"],
        vec!["flow", "--dim", "3", "--c", "explicit:1,oops,3"],
        vec!["flow", "--dim", "3", "--c", "explicit:1,2"],
        vec!["flow", "--dim", "3", "--c", "uniform", "--dt", "0"],
        vec!["lp", "--dim", "3"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
    let o = run(&["flow", "--dim", "3", "--c", "explicit:1,oops,3"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("position 11"));
}

#[test]
fn failed_assertion_exits_one() {
    let o = run(&["lp", "--dim", "3", "--c", "explicit:2,2,2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&[
        "flow",
        "--dim",
        "3",
        "--c",
        "explicit:50,0,25",
        "--p0",
        "explicit:0.2,0.6,0.2",
        "--method",
        "rk4",
        "--t-max",
        "5",
        "--dt",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("flows::integrate_rk4"));
}

#[test]
fn deterministic_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let p = dir.path().join(name);
        let o = run(&["integrability", "--dim", "5", "--seed", "11", "--no-timestamp", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(std::fs::read_to_string(&p).unwrap().replace(name, ""));
    }
    assert_eq!(outputs[0], outputs[1]);
    let doc: serde_json::Value = serde_json::from_str(&outputs[0]).unwrap();
    let report = doc["report"].as_object().unwrap();
    assert_eq!(report.len(), 5);
    assert_eq!(report["seed"], 11);
    assert!(doc.get("generated_at").is_none());
}

#[test]
fn seed_from_environment_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let read = |args: &[&str], env: Option<&str>, name: &str| -> String {
        let p = dir.path().join(name);
        let mut cmd = bin();
        cmd.args(args).args(["--no-timestamp", "--format", "csv", "--out", p.to_str().unwrap()]);
        if let Some(s) = env {
            cmd.env("SIMPLEXGEO_SEED", s);
        }
        assert!(cmd.output().unwrap().status.success());
        std::fs::read_to_string(p).unwrap()
    };
    let from_env = read(&["isometry", "--dim", "4"], Some("5"), "e.csv");
    let from_flag = read(&["isometry", "--dim", "4", "--seed", "5"], None, "f.csv");
    let overridden = read(&["isometry", "--dim", "4", "--seed", "5"], Some("9"), "g.csv");
    let other = read(&["isometry", "--dim", "4"], Some("9"), "h.csv");
    assert_eq!(from_env, from_flag);
    assert_eq!(from_flag, overridden);
    assert_ne!(from_flag, other);
}

#[test]
fn config_file_supplies_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let out = dir.path().join("lp.json");
    std::fs::write(&cfg, r#"{"command": "lp", "dim": 4, "c_spec": "geometric:0.5", "tol": 1e-10}"#).unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["command"], "lp");
    assert!(doc["report"]["gap_l1"].as_f64().unwrap() <= 1e-10);

    std::fs::write(&cfg, r#"{"dimension": 4}"#).unwrap();
    assert_eq!(run(&["flow", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn geodesic_and_bracket_commands() {
    let o = run(&["geodesic", "--dim", "5", "--v0", "explicit:0.1,-0.1,0.05,0,-0.05", "--t-max", "1", "--dt", "0.25"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["geodesic", "--dim", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["bracket", "--dim", "6", "--c", "explicit:1,1,2,2,3,3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("analytic_max=0.0e0"));
}
