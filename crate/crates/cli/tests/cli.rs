use std::path::Path;
use std::process::{Command, Output};

const LTMFSM: &str = r#"{"kind":"LTmFSM","hurst":{"type":"sinusoidal","mean":0.6,"amplitude":0.2,"period":6.283185307179586,"phase":0},"stability":{"type":"constant","value":1.5},"lambda":0.3}"#;
const LTFMSM: &str = r#"{"kind":"LTFmSM","hurst":{"type":"constant","value":0.7},"stability":{"type":"sinusoidal","mean":1.5,"amplitude":0.3,"period":6.283185307179586,"phase":0},"lambda":0.1}"#;

fn tmsm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmsm"))
        .args(args)
        .env_remove("TMSM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn cf_at_zero_theta_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "spec.json", LTFMSM);
    let o = tmsm(&["cf", "--spec", &spec, "--t", "1", "--theta", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "1.0");
}

#[test]
fn cf_sweep_writes_table() {
    let o = tmsm(&["cf", "--spec", LTFMSM, "--t", "1,2", "--theta", "1,-1", "--sweep", "2,5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "scale,theta1,theta2,cf");
    assert_eq!(lines.len(), 7);
    let mid: Vec<f64> = lines[4].split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(mid[3], 1.0);
}

#[test]
fn scaling_identity_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(dir.path(), "ltmfsm.json", LTMFSM);
    let o = tmsm(&["scaling", "--spec", &spec, "--c", "2", "--tol", "1e-8"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["difference"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn bad_spec_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"kind":"LTFmSM","hurst":{"type":"constant","value":0.7},"stability":{"type":"constant","value":2.5},"lambda":0.1}"#,
    );
    let o = tmsm(&["simulate", "--spec", &bad, "--times", "1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = tmsm(&["simulate", "--spec", "/nonexistent/spec.json", "--times", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_flag_prints_usage() {
    let o = tmsm(&["cf", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(tmsm(&["nope"]).status.code(), Some(2));
}

#[test]
fn simulate_is_independent_of_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let base = ["simulate", "--spec", LTFMSM, "--times", "0.5,1", "--paths", "40", "--dt", "0.01", "--seed", "9"];
    let mut one = base.to_vec();
    one.extend(["--threads", "1", "--out", a.to_str().unwrap()]);
    let mut three = base.to_vec();
    three.extend(["--threads", "3", "--out", b.to_str().unwrap()]);
    assert_eq!(tmsm(&one).status.code(), Some(0));
    assert_eq!(tmsm(&three).status.code(), Some(0));
    // Only the embedded --out path differs between the two config lines.
    let body = |p: &Path| std::fs::read_to_string(p).unwrap().lines().skip(1).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(body(&a), body(&b));
}

#[test]
fn simulate_binary_matches_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("p.csv");
    let bin_path = dir.path().join("p.bin");
    let base = ["simulate", "--spec", LTFMSM, "--times", "0.25,1", "--paths", "7", "--dt", "0.01", "--seed", "3"];
    let mut c = base.to_vec();
    c.extend(["--out", csv_path.to_str().unwrap()]);
    let mut b = base.to_vec();
    b.extend(["--format", "binary", "--out", bin_path.to_str().unwrap()]);
    assert_eq!(tmsm(&c).status.code(), Some(0));
    assert_eq!(tmsm(&b).status.code(), Some(0));

    let bytes = std::fs::read(&bin_path).unwrap();
    let bin: Vec<f64> = bytes.chunks(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let from_csv: Vec<f64> = text
        .lines()
        .skip(2)
        .flat_map(|l| l.split(',').skip(1).map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .collect();
    assert_eq!(bin, from_csv);

    let mut side = bin_path.into_os_string();
    side.push(".json");
    let meta: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(meta["shape"], serde_json::json!([7, 2]));
    assert_eq!(meta["config"]["args"]["seed"], 3);
}

#[test]
fn embedded_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("q1.csv");
    let o = tmsm(&["quasinorm", "--spec", LTFMSM, "--slope", "--t", "1", "--out", first.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&first).unwrap();
    let cfg: serde_json::Value = serde_json::from_str(text.lines().next().unwrap().trim_start_matches("# config: ")).unwrap();
    let args = &cfg["args"];

    let second = dir.path().join("q2.csv");
    let t = args["t"].as_f64().unwrap().to_string();
    let tol = args["tol"].as_f64().unwrap().to_string();
    let o = tmsm(&[
        "quasinorm",
        "--spec",
        args["spec"].as_str().unwrap(),
        "--slope",
        "--t",
        &t,
        "--tol",
        &tol,
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let again = std::fs::read_to_string(&second).unwrap();
    let body = |s: &str| s.lines().skip(1).map(str::to_string).collect::<Vec<_>>();
    assert_eq!(body(&text), body(&again));
}

#[test]
fn dependence_table_and_fit() {
    let spec = r#"{"kind":"LTFmSM","hurst":{"type":"constant","value":0.7},"stability":{"type":"constant","value":1.6},"lambda":0.05}"#;
    let o = tmsm(&["dependence", "--spec", spec, "--lags", "20,40,60,80,100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[1], "t,I,logK,R,log|R|");
    assert_eq!(lines.len(), 7);
    let cfg: serde_json::Value = serde_json::from_str(lines[0].trim_start_matches("# config: ")).unwrap();
    assert!(cfg["fit"]["exp_rate"].is_f64());
}

#[test]
fn semilrd_partial_sums_increase() {
    let o = tmsm(&["semilrd", "--spec", LTFMSM, "--lambdas", "0.1", "--n", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let sums: Vec<f64> = stdout(&o)
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(sums.len(), 5);
    assert!(sums.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn localize_verdict_and_strict_exit() {
    let o = tmsm(&["localize", "--spec", LTFMSM, "--r", "1,0.1,0.01", "--gate", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("# config: "));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"pass\":true"));
    let o = tmsm(&["localize", "--spec", LTFMSM, "--r", "1,0.1,0.01", "--gate", "1e-12", "--strict"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn verify_all_is_deterministic() {
    let run = || {
        let o = tmsm(&["verify-all", "--only", "1", "--seed", "11"]);
        assert_eq!(o.status.code(), Some(0));
        let text = stdout(&o);
        let json_start = text.find("\n{").unwrap() + 1;
        assert!(text[..json_start].contains("[PASS]"));
        let v: serde_json::Value = serde_json::from_str(&text[json_start..]).unwrap();
        v["criteria"][0]["measured"].clone()
    };
    assert_eq!(run(), run());
}

#[test]
fn verify_all_empty_config_uses_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "empty.json", "{}");
    let out = dir.path().join("report.json");
    let o = tmsm(&["verify-all", "--config", &cfg, "--only", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["config"]["options"]["seed"], 20_240_917);
    assert_eq!(v["config"]["options"]["fast"], false);
    assert_eq!(tmsm(&["verify-all", "--only", "11"]).status.code(), Some(2));
}
