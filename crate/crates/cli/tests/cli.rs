use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn calabi(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calabi"))
        .current_dir(dir)
        .env_remove("CALABI_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) {
    std::fs::write(dir.join(name), v.to_string()).unwrap();
}

/// Two-node normalized domain with the densities (1, 1) and (3/2, 1/2).
fn d2_pair() -> TempDir {
    let dir = TempDir::new().unwrap();
    let dom = json!({"weights": [0.125, 0.125]});
    write(
        dir.path(),
        "a.json",
        &json!({"domain": dom, "u": [0.0, 0.0]}),
    );
    write(
        dir.path(),
        "b.json",
        &json!({"domain": dom, "density": [1.5, 0.5]}),
    );
    dir
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

#[test]
fn distance_matrix_of_pair() {
    let dir = d2_pair();
    let o = calabi(dir.path(), &["distance", "a.json", "b.json", "a.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("# calabi "));
    let m: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(m[0][0], 0.0);
    assert_eq!(m[0][2], 0.0);
    assert!((m[0][1] - PI / 12.0).abs() < 1e-12);
    assert!((m[0][1] - 0.2617994).abs() < 1e-7);
    assert_eq!(m[0][1], m[1][0]);
}

#[test]
fn distance_json_carries_header() {
    let dir = d2_pair();
    let o = calabi(dir.path(), &["--json", "distance", "a.json", "b.json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["header"]["tool"], "calabi");
    assert_eq!(v["header"]["config_hash"].as_str().unwrap().len(), 16);
    assert_eq!(v["inputs"][1], "b.json");
}

#[test]
fn interpolate_writes_frames_and_manifest() {
    let dir = d2_pair();
    let o = calabi(
        dir.path(),
        &[
            "--out",
            "run",
            "interpolate",
            "a.json",
            "b.json",
            "--frames",
            "5",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let m: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let on_disk: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("run/manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(m, on_disk);
    assert!((m["t0"].as_f64().unwrap() - PI / 12.0).abs() < 1e-14);
    let frames = m["frames"].as_array().unwrap();
    assert_eq!(frames.len(), 5);
    for f in frames {
        assert!((f["mass"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        let csv = std::fs::read_to_string(dir.path().join("run").join(f["file"].as_str().unwrap()))
            .unwrap();
        assert!(csv.starts_with("# calabi "));
        assert!(csv.lines().nth(1).unwrap() == "node,weight,density");
    }
    let curve = std::fs::read_to_string(dir.path().join("run/curve.csv")).unwrap();
    assert_eq!(csv_rows(&curve).len(), 5);
}

#[test]
fn two_frames_reproduce_the_inputs() {
    let dir = d2_pair();
    let o = calabi(
        dir.path(),
        &[
            "--out",
            "run",
            "interpolate",
            "a.json",
            "b.json",
            "--frames",
            "2",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let first = csv_rows(&std::fs::read_to_string(dir.path().join("run/frame_0000.csv")).unwrap());
    let last = csv_rows(&std::fs::read_to_string(dir.path().join("run/frame_0001.csv")).unwrap());
    assert_eq!(
        first.iter().map(|r| r[2]).collect::<Vec<_>>(),
        vec![1.0, 1.0]
    );
    let tail: Vec<f64> = last.iter().map(|r| r[2]).collect();
    assert!(
        (tail[0] - 1.5).abs() < 1e-15 && (tail[1] - 0.5).abs() < 1e-15,
        "{tail:?}"
    );
}

#[test]
fn out_dir_from_environment() {
    let dir = d2_pair();
    let o = Command::new(env!("CARGO_BIN_EXE_calabi"))
        .current_dir(dir.path())
        .env("CALABI_OUT_DIR", "envout")
        .args(["interpolate", "a.json", "b.json", "--frames", "3"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.path().join("envout/manifest.json").exists());
}

#[test]
fn mean_of_two_is_the_midpoint() {
    let dir = d2_pair();
    let o = calabi(dir.path(), &["mean", "a.json", "b.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let u: Vec<f64> = serde_json::from_value(v["u"].clone()).unwrap();
    // Midpoint of the great-circle arc: e^{u/2} proportional to the sum of
    // the endpoint square roots, rescaled to the same mass.
    let s = [1.0 + 1.5f64.sqrt(), 1.0 + 0.5f64.sqrt()];
    let mass = 0.125 * (s[0] * s[0] + s[1] * s[1]);
    for (ui, si) in u.iter().zip(s) {
        let expected = 2.0 * (si / (mass / 0.25).sqrt()).ln();
        assert!((ui - expected).abs() < 1e-10, "{ui} vs {expected}");
    }
}

#[test]
fn mean_writes_output_file() {
    let dir = d2_pair();
    let o = calabi(
        dir.path(),
        &[
            "mean",
            "a.json",
            "b.json",
            "--weights",
            "0.25,0.75",
            "--output",
            "m/mean.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let v: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("m/mean.json")).unwrap())
            .unwrap();
    assert!(v["header"].is_object());
}

#[test]
fn exp_of_log_returns_the_target() {
    let dir = d2_pair();
    let o = calabi(dir.path(), &["log", "a.json", "b.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    std::fs::write(dir.path().join("v.json"), stdout(&o)).unwrap();
    let o = calabi(dir.path(), &["exp", "a.json", "v.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let u: Vec<f64> = serde_json::from_value(v["u"].clone()).unwrap();
    assert!((u[0] - 1.5f64.ln()).abs() < 1e-12);
    assert!((u[1] - 0.5f64.ln()).abs() < 1e-12);
}

#[test]
fn geodesic_and_jacobi_commands() {
    let dir = d2_pair();
    write(dir.path(), "v.json", &json!({"v": [1.0, -1.0]}));
    let o = calabi(
        dir.path(),
        &[
            "geodesic", "a.json", "v.json", "--frames", "3", "--t-end", "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    // 2 ln(cos t +- sin t) at t = 1.
    assert!((rows[2][1] - 0.6105647).abs() < 1e-7);
    assert!((rows[2][2] + 1.8418176).abs() < 1e-7);
    let o = calabi(dir.path(), &["jacobi", "a.json", "v.json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["conjugate_found"], false);
}

#[test]
fn verify_on_three_nodes() {
    let dir = TempDir::new().unwrap();
    let o = calabi(
        dir.path(),
        &["--domain", "3", "verify", "--report", "r.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert!((v["sectional_curvature"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["sectional_curvature_fd"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    assert!(dir.path().join("r.json").exists());
}

#[test]
fn verify_default_domain_meets_sequence_targets() {
    let dir = TempDir::new().unwrap();
    let o = calabi(dir.path(), &["verify"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["domain"]["nodes"], 1024);
    assert!(v["diameter_best"].as_f64().unwrap() > 1.5);
    assert!(v["boundary_best"].as_f64().unwrap() < 0.05);
}

#[test]
fn sequences_improve_with_k() {
    let dir = TempDir::new().unwrap();
    let o = calabi(
        dir.path(),
        &["--domain", "256", "sequences", "--k-max", "5"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[1][1] > w[0][1]));
    assert!(rows.iter().all(|r| r[1] < PI / 2.0));
}

#[test]
fn grid_geodesic_runs_and_rejects_bad_times() {
    let dir = TempDir::new().unwrap();
    let n = 8;
    let phi: Vec<f64> = (0..n * n)
        .map(|k| 1e-3 * (2.0 * PI * (k % n) as f64 / n as f64).sin())
        .collect();
    let psi: Vec<f64> = (0..n * n)
        .map(|k| 1e-3 * (2.0 * PI * (k / n) as f64 / n as f64).cos())
        .collect();
    write(
        dir.path(),
        "phi.json",
        &json!({"nx": n, "ny": n, "phi": phi}),
    );
    write(dir.path(), "psi.json", &json!({"psi": psi}));
    let o = calabi(
        dir.path(),
        &["grid-geodesic", "phi.json", "psi.json", "--frames", "4"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(csv_rows(&stdout(&o)).len(), 4);
    let o = calabi(
        dir.path(),
        &["grid-geodesic", "phi.json", "psi.json", "--t-end", "1e6"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("admissible"));
}

#[test]
fn exit_codes() {
    let dir = d2_pair();
    let o = calabi(dir.path(), &["distance", "a.json", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing.json"));

    write(
        dir.path(),
        "bad.json",
        &json!({"domain": {"weights": [0.125, 0.125]}, "u": "x"}),
    );
    let o = calabi(dir.path(), &["distance", "a.json", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("bad.json"), "{err}");
    assert!(err.contains('u'), "{err}");

    write(
        dir.path(),
        "off.json",
        &json!({"domain": {"weights": [0.125, 0.125]}, "u": [1.0, 1.0]}),
    );
    let o = calabi(dir.path(), &["distance", "a.json", "off.json"]);
    assert_eq!(o.status.code(), Some(2));

    let o = calabi(dir.path(), &["distance", "a.json", "a.json", "--tol=-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--tol"));

    let o = calabi(dir.path(), &["log", "a.json", "a.json"]);
    assert_eq!(o.status.code(), Some(0));

    let o = calabi(dir.path(), &["mean", "a.json", "b.json", "--max-iter", "0"]);
    assert_eq!(o.status.code(), Some(4));

    // A coarse Runge-Kutta step makes the dual Jacobi check fail for real.
    let o = calabi(dir.path(), &["--domain", "16", "--step", "0.5", "verify"]);
    assert_eq!(o.status.code(), Some(3));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], false);
}

#[test]
fn mismatched_domains_are_rejected_unless_overridden() {
    let dir = d2_pair();
    write(
        dir.path(),
        "c.json",
        &json!({"domain": {"weights": [0.1, 0.15]}, "density": [1.0, 1.0]}),
    );
    let o = calabi(dir.path(), &["distance", "a.json", "c.json"]);
    assert_eq!(o.status.code(), Some(2));
    let o = calabi(
        dir.path(),
        &["--domain", "2", "distance", "a.json", "c.json"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = d2_pair();
    for args in [
        vec!["--out", "r1", "interpolate", "a.json", "b.json"],
        vec!["--out", "r2", "interpolate", "a.json", "b.json"],
    ] {
        assert!(calabi(dir.path(), &args).status.success());
    }
    for f in ["manifest.json", "curve.csv", "frame_0005.csv"] {
        let a = std::fs::read(dir.path().join("r1").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("r2").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let a = stdout(&calabi(
        dir.path(),
        &["--domain", "64", "--seed", "7", "verify"],
    ));
    let b = stdout(&calabi(
        dir.path(),
        &["--domain", "64", "--seed", "7", "verify"],
    ));
    assert_eq!(a, b);
    let c = stdout(&calabi(
        dir.path(),
        &["--domain", "64", "--seed", "8", "verify"],
    ));
    assert_ne!(a, c);
}

#[test]
fn config_hash_tracks_settings() {
    let dir = d2_pair();
    let h = |args: &[&str]| -> String {
        let o = calabi(dir.path(), args);
        stdout(&o).lines().next().unwrap().to_string()
    };
    let base = h(&["distance", "a.json", "b.json"]);
    assert_eq!(
        base,
        h(&["--out", "elsewhere", "distance", "a.json", "b.json"])
    );
    assert_ne!(base, h(&["--step", "1e-3", "distance", "a.json", "b.json"]));
}
