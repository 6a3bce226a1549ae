use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const LN_2: f64 = std::f64::consts::LN_2;

fn lyapspec(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyapspec"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], out: &Path) {
    let o = lyapspec(args, out);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV after the comment and header lines.
fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config "));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|x| if x == "true" { 1.0 } else if x == "false" { 0.0 } else { x.parse().unwrap() }).collect())
        .collect();
    (header, rows)
}

fn point(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn analyze_chebyshev() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["analyze", "--family", "chebyshev", "--depth", "10"], dir.path());
    let r = json(&dir.path().join("analyze.json"));
    let mut pts: Vec<(f64, f64)> = r["exceptional"]["points"].as_array().unwrap().iter().map(point).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    assert_eq!(pts.len(), 2);
    assert!((pts[0].0 + 2.0).abs() < 1e-9 && (pts[1].0 - 2.0).abs() < 1e-9);
    assert_eq!(r["degree_constant"]["d"], 2);
    assert!((r["chi_ess_plus"].as_f64().unwrap() - LN_2).abs() < 1e-6);
    assert!((r["chi_sup"]["value"].as_f64().unwrap() - 4f64.ln()).abs() < 1e-6);
    assert!(json(&dir.path().join("exceptional.json"))["config_hash"].is_string());
}

#[test]
fn analyze_power_map_is_not_exceptional() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["analyze", "--family", "power", "--d", "2", "--depth", "8"], dir.path());
    let r = json(&dir.path().join("analyze.json"));
    assert!(r["exceptional"]["points"].as_array().unwrap().is_empty());
    assert_eq!(r["degree_constant"]["d"], 1);
}

#[test]
fn map_file_with_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("cheb.map");
    fs::write(&spec, "# z^2 - 2\nnum: (-2, 0), (0, 0), (1, 0)\nden: (1, 0)\n").unwrap();
    ok(&["analyze", "--map", spec.to_str().unwrap(), "--depth", "8"], dir.path());
    let r = json(&dir.path().join("analyze.json"));
    assert_eq!(r["exceptional"]["points"].as_array().unwrap().len(), 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.map");
    fs::write(&bad, "num: (1, 0), (0 0)\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "--map", bad.to_str().unwrap()],
        vec!["analyze", "--map", "/nonexistent/map"],
        vec!["frobnicate"],
        vec!["analyze"],
        vec!["analyze", "--family", "power"],
        vec!["pressure", "--family", "chebyshev", "--t-min", "1", "--t-max", "-1"],
        vec!["pressure", "--family", "chebyshev", "--depth", "40"],
        vec!["analyze", "--family", "chebyshev", "--radius", "-1"],
    ];
    for args in cases {
        let o = lyapspec(&args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn numeric_failure_exits_3() {
    // p too close to the hidden pressure of z^2 at t = 1, which is 0.
    let dir = tempfile::tempdir().unwrap();
    let o = lyapspec(&["measure", "--family", "power", "--d", "2", "--depth", "8", "--p", "0.001"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn pressure_chebyshev_reports_transition() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["pressure", "--family", "chebyshev", "--depth", "16"], dir.path());
    let r = json(&dir.path().join("pressure.json"));
    let t_minus = r["t_minus"].as_f64().expect("t_minus present");
    assert!((t_minus + 1.0).abs() < 0.15, "{t_minus}");
    assert_eq!(r["depth"], 16);
    let (header, rows) = csv_rows(&dir.path().join("pressure.csv"));
    assert_eq!(header, ["t", "hidden", "full", "convergence"]);
    assert_eq!(rows.len(), 21);
    let (header, rows) = csv_rows(&dir.path().join("tree.csv"));
    assert_eq!(header, ["re", "im", "log_deriv", "excluded"]);
    assert_eq!(rows.len(), 1 << 16);
}

#[test]
fn pressure_power_map_has_no_transition() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["pressure", "--family", "power", "--d", "2", "--depth", "10"], dir.path());
    let r = json(&dir.path().join("pressure.json"));
    assert!(r.get("t_minus").is_none());
    for row in csv_rows(&dir.path().join("pressure.csv")).1 {
        assert!((row[1] - (1.0 - row[0]) * LN_2).abs() < 1e-9);
    }
}

#[test]
fn grid_flags_are_respected() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["pressure", "--family", "power", "--d", "2", "--depth", "6", "--t-min", "-1", "--t-max", "1", "--t-step", "0.5"], dir.path());
    let ts: Vec<f64> = csv_rows(&dir.path().join("pressure.csv")).1.iter().map(|r| r[0]).collect();
    assert_eq!(ts, [-1.0, -0.5, 0.0, 0.5, 1.0]);
}

#[test]
fn spectrum_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["spectrum", "--family", "chebyshev", "--depth", "16"], dir.path());
    let (_, rows) = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 1, "degenerate range gives one point");
    assert!((rows[0][0] - LN_2).abs() < 0.05 && (rows[0][1] - 1.0).abs() < 0.05, "{rows:?}");
    let audit = json(&dir.path().join("spectrum_audit.json"));
    assert_eq!(audit["no_closed_form"], false);
    assert!(audit["closed_form"]["error"].as_f64().unwrap() < 0.05);

    ok(&["spectrum", "--family", "power", "--d", "2", "--depth", "12"], dir.path());
    let (_, rows) = csv_rows(&dir.path().join("spectrum.csv"));
    assert_eq!(rows.len(), 1);
    assert!((rows[0][0] - LN_2).abs() < 1e-6 && (rows[0][1] - 1.0).abs() < 1e-6);
}

#[test]
fn spectrum_without_closed_form_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["spectrum", "--family", "quadratic", "--c", "-1", "--depth", "12"], dir.path());
    let audit = json(&dir.path().join("spectrum_audit.json"));
    assert_eq!(audit["no_closed_form"], true);
    assert!(audit.get("closed_form").is_none());
    assert_eq!(audit["pressure_monotone"], true);
    assert_eq!(audit["concave"], true);
}

#[test]
fn measure_outputs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["measure", "--family", "chebyshev", "--t", "-2", "--depth", "12"], dir.path());
    let r = json(&dir.path().join("measure.json"));
    assert!((r["p"].as_f64().unwrap() - (4.0 * LN_2 + 0.05)).abs() < 1e-9);
    let blow = r["blow_up"].as_array().unwrap();
    assert_eq!(blow.len(), 1, "one periodic point of the exceptional set");
    assert!((point(&blow[0]["center"]).0 - 2.0).abs() < 1e-9);
    assert!(blow[0]["ratio"].as_f64().unwrap() > 1.0, "annulus mass grows with depth");
    let (header, atoms) = csv_rows(&dir.path().join("atoms.csv"));
    assert_eq!(header, ["re", "im", "weight", "n"]);
    assert!(atoms.iter().all(|a| a[2] > 0.0 && a[2].is_finite()));
    let (header, _) = csv_rows(&dir.path().join("defects.csv"));
    assert_eq!(header, ["p", "depth", "defect"]);
}

#[test]
fn pliss_on_the_circle_lists_every_time() {
    let dir = tempfile::tempdir().unwrap();
    let z = format!("{},{}", 0.7f64.cos(), 0.7f64.sin());
    let chi = LN_2.to_string();
    ok(&["pliss", "--family", "power", "--d", "2", "--depth", "10", "--basepoint", &z, "--chi", &chi, "--length", "20"], dir.path());
    let r = json(&dir.path().join("pliss.json"));
    let times: Vec<u64> = r["times"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    assert_eq!(times, (1..=20).collect::<Vec<_>>());
    let (header, _) = csv_rows(&dir.path().join("shadow.csv"));
    assert_eq!(header, ["j", "dist", "bound"]);
}

#[test]
fn outputs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["measure", "--family", "quadratic", "--c", "-1", "--depth", "10", "--seed", "7"];
    ok(&args, a.path());
    ok(&[&args[..], &["--workers", "1"]].concat(), b.path());
    for name in ["atoms.csv", "defects.csv", "measure.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    // A different seed changes the config hash.
    let c = tempfile::tempdir().unwrap();
    ok(&["pressure", "--family", "power", "--d", "2", "--depth", "6", "--seed", "1"], c.path());
    let d = tempfile::tempdir().unwrap();
    ok(&["pressure", "--family", "power", "--d", "2", "--depth", "6", "--seed", "2"], d.path());
    let hash = |p: &Path| fs::read_to_string(p.join("pressure.csv")).unwrap().lines().next().unwrap().to_string();
    assert_ne!(hash(c.path()), hash(d.path()));
}
