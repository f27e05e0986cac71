use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

const CASE_ONE: &str = r#"{"a1":1,"a2":20,"b1":0.1,"b2":2,"alpha":0.5,"beta":0.1,"rod_length":"inf"}"#;

fn case_one() -> Value {
    serde_json::from_str(CASE_ONE).unwrap()
}

fn elastic() -> Value {
    json!({"a1":1,"a2":1,"b1":0.1,"b2":0.1,"alpha":0.5,"beta":0.1,"rod_length":"inf"})
}

struct Run {
    out: PathBuf,
    output: Output,
    _dir: tempfile::TempDir,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().unwrap()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.output.stderr).into_owned()
    }

    fn read(&self, name: &str) -> Vec<u8> {
        std::fs::read(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_slice(&self.read(name)).unwrap()
    }

    /// `field.csv` or `kernel.csv` as `(x, t, value)` rows.
    fn table(&self, name: &str) -> Vec<[f64; 3]> {
        let text = String::from_utf8(self.read(name)).unwrap();
        text.lines()
            .skip(1)
            .map(|l| {
                let v: Vec<f64> = l.split(',').map(|c| c.parse().unwrap()).collect();
                [v[0], v[1], v[2]]
            })
            .collect()
    }
}

fn run_text(spec: &str, extra: &[&str], env: &[(&str, &str)]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let spec_path = dir.path().join("run.json");
    std::fs::write(&spec_path, spec).unwrap();
    let out = dir.path().join("out");
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_zenerwave"));
    cmd.arg("--spec").arg(&spec_path).arg("--out").arg(&out).args(extra);
    for (k, v) in env {
        cmd.env(k, v);
    }
    let output = cmd.output().unwrap();
    Run { out, output, _dir: dir }
}

fn run(spec: Value) -> Run {
    run_text(&spec.to_string(), &["--quiet"], &[])
}

fn sha(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn assert_manifest_complete(r: &Run, out: &Path) {
    let m = r.json("manifest.json");
    assert_eq!(m["exit_code"], r.code());
    let files = m["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let name = f["name"].as_str().unwrap();
        let bytes = std::fs::read(out.join(name)).unwrap();
        assert_eq!(f["sha256"], sha(&bytes), "{name}");
        assert_eq!(f["bytes"], bytes.len());
    }
    let mut on_disk: Vec<String> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = files.iter().map(|f| f["name"].as_str().unwrap().to_string()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
}

#[test]
fn check_case_one_is_strictly_admissible() {
    let r = run(json!({"command": "check", "params": case_one(), "strict": true}));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert_eq!(r.json("report.json")["verdict"]["status"], "AdmissibleStrict");
    assert_manifest_complete(&r, &r.out);
}

#[test]
fn violated_equality_exits_two() {
    let mut p = case_one();
    p["b2"] = json!(3.0);
    let r = run(json!({"command": "check", "params": p}));
    assert_eq!(r.code(), 2);
    let report = r.json("report.json");
    assert!((report["td1_residual"].as_f64().unwrap().abs() - 1.0).abs() < 1e-12);
    assert_manifest_complete(&r, &r.out);
}

#[test]
fn schema_errors_exit_one() {
    let mut p = case_one();
    p.as_object_mut().unwrap().remove("alpha");
    let r = run(json!({"command": "check", "params": p}));
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("alpha"), "{}", r.stderr());

    let r = run_text("{\"command\": \"check\",\n  \"params\": [", &[], &[]);
    assert_eq!(r.code(), 1);
    assert!(r.stderr().contains("line 2"), "{}", r.stderr());

    let status = Command::new(env!("CARGO_BIN_EXE_zenerwave")).output().unwrap().status;
    assert_eq!(status.code(), Some(1));
}

#[test]
fn inadmissible_parameters_block_simulation() {
    let mut p = case_one();
    p["b1"] = json!(5.0);
    p["b2"] = json!(100.0);
    let r = run(json!({
        "command": "simulate",
        "params": p,
        "signal": {"kind": "dirac"},
        "grid": {"xs": [1.0], "ts": [1.0]},
    }));
    assert_eq!(r.code(), 2);
    assert!(r.out.join("report.json").exists());
    assert!(!r.out.join("field.csv").exists());
}

#[test]
fn numerical_failure_exits_three_and_names_the_cell() {
    let r = run(json!({
        "command": "kernel",
        "params": case_one(),
        "quadrature": {"tau_max_cap": 1e4},
        "grid": {"xs": [0.05], "ts": [1.0]},
    }));
    assert_eq!(r.code(), 3, "{}", r.stderr());
    assert!(r.stderr().contains("0.05"), "{}", r.stderr());
    assert_eq!(r.json("manifest.json")["exit_code"], 3);
}

#[test]
fn modulus_outputs_are_deterministic() {
    let spec = json!({
        "command": "modulus",
        "params": case_one(),
        "modulus": {"omega": {"start": 1e-2, "stop": 1e2, "count": 50, "spacing": "log"}},
    });
    let a = run(spec.clone());
    let b = run_text(&spec.to_string(), &["--quiet"], &[("ZENERWAVE_THREADS", "1")]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    assert_eq!(b.code(), 0, "{}", b.stderr());
    for name in ["modulus.csv", "modulus.dat", "winding.json", "report.json"] {
        assert_eq!(a.read(name), b.read(name), "{name}");
    }
    assert_eq!(a.json("winding.json")["winding"], 0);
    let rows = String::from_utf8(a.read("modulus.csv")).unwrap();
    assert!(rows.starts_with("omega,re_E,im_E,re_M,im_M\n"));
    for line in rows.lines().skip(1) {
        let im_e: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(im_e >= -1e-12);
    }
    assert_manifest_complete(&a, &a.out);
}

#[test]
fn elastic_heaviside_is_a_step_at_the_arrival() {
    let r = run(json!({
        "command": "simulate",
        "params": elastic(),
        "signal": {"kind": "heaviside"},
        "grid": {"xs": [0.0, 0.5, 1.0, 2.0], "ts": {"start": 0.25, "stop": 3.0, "count": 12}},
    }));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    for [x, t, u] in r.table("field.csv") {
        let want = if t > x { 1.0 } else if t < x { 0.0 } else { 0.5 };
        assert_eq!(u, want, "x={x} t={t}");
    }
}

#[test]
fn boundary_row_equals_the_signal() {
    let values = [0.0, 0.5, 1.0, 0.25, -0.5, 0.0];
    let r = run(json!({
        "command": "simulate",
        "params": case_one(),
        "signal": {"kind": "sampled", "samples": {"dt": 0.1, "values": values}, "scale": 2.0},
        "grid": {"xs": [0.0, 0.2], "ts": {"start": 0.0, "stop": 0.5, "count": 6}},
    }));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.table("field.csv");
    for (k, row) in rows.iter().filter(|r| r[0] == 0.0).enumerate() {
        let want = if k == 0 { 0.0 } else { 2.0 * values[k] };
        assert_eq!(row[2], want, "t={}", row[1]);
    }
}

/// Digest of `field.csv` recorded from the first verified build.
const CASE_ONE_DIRAC_FIELD: &str = "95303bd3ff7ae9e52904fe605e4d0c765ace47c29039d201e0cb2c9395a906d0";

#[test]
fn case_one_dirac_field_matches_baseline() {
    let r = run(json!({
        "command": "simulate",
        "params": case_one(),
        "signal": {"kind": "dirac"},
        "grid": {"xs": {"start": 0.1, "stop": 3.0, "count": 30}, "ts": [1.0]},
    }));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let rows = r.table("field.csv");
    assert_eq!(rows.len(), 30);
    // rising towards the front, which lies beyond x = 3 at t = 1
    assert!(rows.windows(2).all(|w| w[1][2] > w[0][2]));
    assert_eq!(sha(&r.read("field.csv")), CASE_ONE_DIRAC_FIELD);
    let m = r.json("manifest.json");
    assert_eq!(m["quadrature"]["abs_tol"], 1e-9);
    assert_eq!(m["signal"]["kind"], "dirac");
}

#[test]
fn oracle_command_reports_residuals() {
    let r = run(json!({"command": "oracle", "params": case_one(), "oracle": {"dt": 4e-3}}));
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let o = r.json("oracle.json");
    assert_eq!(o["elastic"], 0.0);
    assert!(o["zener"].as_f64().unwrap() < 1e-2);
    assert!(o["field"].as_f64().unwrap() < 5e-2);
    assert_eq!(o["passed"], true);
}
