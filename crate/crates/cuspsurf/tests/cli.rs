use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cuspsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cuspsurf")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn eval_at_origin_and_on_the_degenerate_set() {
    let o = cuspsurf(&["eval", "--x", "0"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(column(&out, "X0")[0].parse::<f64>().unwrap(), 2.5);
    assert_eq!(column(&out, "X0p_over_x")[0].parse::<f64>().unwrap(), 2.0);

    let o = cuspsurf(&["eval", "--x", "1", "--y", "1"]);
    assert_eq!(column(&stdout(&o), "class"), vec!["S1_degenerate"]);

    let o = cuspsurf(&["eval", "--x", "0.5", "2", "--y", "-1", "0.3"]);
    assert_eq!(stdout(&o).lines().count(), 5);
}

#[test]
fn exit_codes() {
    assert_eq!(code(&cuspsurf(&["eval", "--x", "-1"])), 3);
    assert_eq!(code(&cuspsurf(&["eval"])), 2);
    assert_eq!(code(&cuspsurf(&["frobnicate"])), 2);
    assert_eq!(code(&cuspsurf(&["curve", "--kind", "x", "--range", "1", "2"])), 2);
    assert_eq!(code(&cuspsurf(&["grid", "--rect", "-1", "0", "1"])), 3);
    assert_eq!(code(&cuspsurf(&["curve", "--kind", "x", "--y0", "1", "--range", "-1", "2"])), 3);
    let o = cuspsurf(&["curve", "--kind", "x", "--y0", "1", "--range", "1", "2", "-o", "/nonexistent/dir/c.csv"]);
    assert_eq!(code(&o), 4);
    assert_eq!(code(&cuspsurf(&["--help"])), 0);
}

#[test]
fn x_curve_sidecar_matches_radius() {
    let dir = tempfile::tempdir().unwrap();
    for (y0, want, tol) in [("2", (21.0f64 / 5.0).sqrt() / (2.0 * 5f64.sqrt()), 1e-4), ("0", 0.5, 1e-6)] {
        let out = dir.path().join(format!("x{y0}.csv"));
        let o = cuspsurf(&["curve", "--kind", "x", "--y0", y0, "--range", "0.002", "100", "--n", "4096", "-o", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let side = read_json(&dir.path().join(format!("x{y0}.fit.json")));
        let r = side["sphere"]["radius"].as_f64().unwrap();
        assert!((r - want).abs() < tol, "y0={y0}: {r}");
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().count(), 4098);
        assert_eq!(text.lines().next().unwrap().split(',').count(), 21);
    }
}

#[test]
fn y_curve_and_u_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("y.csv");
    let o = cuspsurf(&["curve", "--kind", "y", "--x0", "2", "--range", "-100", "100", "--n", "4000", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let side = read_json(&dir.path().join("y.fit.json"));
    let r = side["sphere"]["radius"].as_f64().unwrap();
    let want = side["expected_radius"].as_f64().unwrap();
    assert!((r - want).abs() < 1e-4);

    let out = dir.path().join("u.csv");
    let o = cuspsurf(&["curve", "--kind", "u", "--y0", "1", "--range", "0", "12", "--n", "2400", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let side = read_json(&dir.path().join("u.fit.json"));
    let r = side["sphere"]["radius"].as_f64().unwrap();
    assert!((r - side["expected_radius"].as_f64().unwrap()).abs() < 1e-10);

    let out = dir.path().join("d.csv");
    let o = cuspsurf(&["curve", "--kind", "diagonal", "--range", "0.5", "1.5", "--n", "64", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(read_json(&dir.path().join("d.fit.json"))["sphere"].is_null());
}

#[test]
fn output_is_deterministic() {
    let args = ["curve", "--kind", "y", "--x0", "0.7", "--range", "-3", "3", "--n", "300"];
    let a = cuspsurf(&args);
    let b = cuspsurf(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn ply_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.ply");
    let o = cuspsurf(&["curve", "--kind", "y", "--x0", "2", "--range", "-1", "1", "--n", "50", "-o", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ply"));
    assert_eq!(lines.next(), Some("format ascii 1.0"));
    assert!(text.contains("element vertex 51\n"));
    let body: Vec<&str> = text.split("end_header\n").nth(1).unwrap().lines().collect();
    assert_eq!(body.len(), 51);
    assert!(body.iter().all(|l| l.split(' ').count() == 3));
    assert!(!dir.path().join("c.fit.json").exists());
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[curve]\nkind = \"x\"\ny0 = 1.0\nrange = [0.5, 2.0]\nn = 100\n").unwrap();
    let c = cfg.to_str().unwrap();
    let o = cuspsurf(&["--config", c, "curve"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 102);
    let o = cuspsurf(&["--config", c, "curve", "--n", "40"]);
    assert_eq!(stdout(&o).lines().count(), 42);

    std::fs::write(&cfg, "[curve]\ncolour = 3\n").unwrap();
    assert_eq!(code(&cuspsurf(&["--config", c, "curve"])), 2);
    assert_eq!(code(&cuspsurf(&["--config", "/nonexistent.toml", "curve"])), 4);
}

#[test]
fn initial_frame_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("frame.txt");
    std::fs::write(&f, "0 1 0 0\n1 0 0 0\n0 0 0 1\n0 0 1 0\n").unwrap();
    let o = cuspsurf(&["curve", "--kind", "x", "--y0", "0.5", "--range", "1", "2", "--n", "10", "--init", f.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!((column(&out, "f01")[0].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert!(column(&out, "f00")[0].parse::<f64>().unwrap().abs() < 1e-12);

    std::fs::write(&f, "1 1 0 0 1 0 0 0 0 0 1 0 0 0 0 1").unwrap();
    let o = cuspsurf(&["curve", "--kind", "x", "--y0", "0.5", "--range", "1", "2", "--init", f.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invariants_subsets() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("rep.json");
    let o = cuspsurf(&["invariants", "--only", "tau", "order-local", "--report", rep.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let r = read_json(&rep);
    assert_eq!(r["summary"]["total"], 2);
    assert_eq!(r["summary"]["passed"], 2);
    let entries = r["entries"].as_array().unwrap();
    assert!(entries[0]["value"].as_f64().unwrap() >= 2.35);
    assert!((entries[1]["value"].as_f64().unwrap() - 3.0).abs() < 0.15);
    let keys: Vec<&String> = entries[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["bound", "measured", "name", "pass", "seconds", "value"]);

    let o = cuspsurf(&["invariants", "--only", "limit-gap"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).starts_with("FAIL limit-gap"));
    let o = cuspsurf(&["invariants", "--only", "tau", "--bound", "tau=-1"]);
    assert_eq!(code(&o), 1);
    assert_eq!(code(&cuspsurf(&["invariants", "--only", "nonsense"])), 2);
    assert_eq!(code(&cuspsurf(&["invariants", "--list"])), 0);
}

#[test]
fn reflect_to_back_side() {
    let o = cuspsurf(&["reflect", "--x", "-2", "--half-width", "3", "--n", "600"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(column(&out, "x").iter().all(|v| v.parse::<f64>().unwrap() == -2.0));
    let ys: Vec<f64> = column(&out, "y").iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(ys.len(), 601);
    assert_eq!(ys[300], 0.0);
    assert_eq!(code(&cuspsurf(&["reflect", "--x", "2", "--half-width", "3", "--n", "601"])), 2);
    assert_eq!(code(&cuspsurf(&["reflect", "--x", "0", "--half-width", "3"])), 3);
}

#[test]
fn grid_export() {
    let o = cuspsurf(&["grid", "--rect", "2", "1", "1", "--n", "8"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 82);
    let last = out.lines().last().unwrap();
    assert!(last.starts_with("8,8,3.0000000000000000e0,2.0000000000000000e0,"));
}

#[test]
fn default_invariant_suite_passes() {
    let o = cuspsurf(&["invariants"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().last().unwrap().ends_with("passed"));
    assert!(!out.contains("FAIL"));
}
