use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn su11(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_su11")).args(args).env_remove("SU11_NUM_THREADS").output().unwrap()
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bundled(name: &str) -> String {
    configs_dir().join(name).display().to_string()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

fn column(text: &str, name: &str) -> Vec<f64> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let idx = rdr.headers().unwrap().iter().position(|h| h == name).unwrap();
    rdr.records().map(|r| r.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn sui_run_matches_oracle() {
    let out = su11(&["run", "--config", &bundled("sui_port1.json"), "--selfcheck"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("scheme,param_json,i_ps,signal,noise,snr,snr_db,snr_oracle,rel_err\n"));
    assert!(!text.contains('\r'));
    let rel = column(&text, "rel_err");
    assert_eq!(rel.len(), 1);
    assert!(rel[0] < 1e-4);
}

#[test]
fn out_of_range_loss_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", r#"{"scheme": "sui_port1", "loss": {"value": 1.5, "site": "external"}}"#);
    let out = su11(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("loss"));
}

#[test]
fn parse_errors_report_position() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "broken.json", "{\n  \"scheme\": \"sui_port1\",\n  \"params\": { \"g1\": }\n}\n");
    let out = su11(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.json:3:"), "{err}");

    let cfg = write_config(&dir, "unknown.json", r#"{"scheme": "sui_port1", "params": {"g3": 1.0}}"#);
    assert_eq!(su11(&["run", "--config", &cfg]).status.code(), Some(2));
    let cfg = write_config(&dir, "top.json", r#"{"scheme": "sui_port1", "colour": "blue"}"#);
    assert_eq!(su11(&["run", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn invalid_sweeps_are_rejected() {
    let dir = TempDir::new().unwrap();
    let zero = write_config(&dir, "zero.json", r#"{"scheme": "sui_port1", "sweep": {"parameter": "g2", "from": 1, "to": 2, "steps": 0}}"#);
    assert_eq!(su11(&["sweep", "--config", &zero]).status.code(), Some(2));
    let empty = write_config(&dir, "empty.json", r#"{"scheme": "sui_port1", "sweep": {"parameter": "g2", "from": 2, "to": 2, "steps": 5}}"#);
    assert_eq!(su11(&["sweep", "--config", &empty]).status.code(), Some(2));
    let missing = write_config(&dir, "missing.json", r#"{"scheme": "sui_port1"}"#);
    assert_eq!(su11(&["sweep", "--config", &missing]).status.code(), Some(2));
    let delta = write_config(&dir, "delta.json", r#"{"scheme": "sui_port1", "params": {"delta": 0.2}}"#);
    assert_eq!(su11(&["run", "--config", &delta]).status.code(), Some(2));
}

#[test]
fn squeezed_loss_sweep_has_ten_rows_and_rising_noise() {
    let out = su11(&["sweep", "--config", &bundled("mzi_squeezed_loss_sweep.json"), "--selfcheck"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",rel_err,loss"));
    let loss = column(&text, "loss");
    assert_eq!(loss.len(), 10);
    assert_eq!(loss[0], 0.0);
    assert_eq!(loss[9], 0.9);
    let noise = column(&text, "noise");
    assert!(noise.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn second_gain_sweep_never_lowers_snr() {
    let out = su11(&["sweep", "--config", &bundled("sui_g2_sweep.json")]);
    assert_eq!(out.status.code(), Some(0));
    let snr = column(&String::from_utf8(out.stdout).unwrap(), "snr");
    assert_eq!(snr.len(), 25);
    assert!(snr.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn oracle_mismatch_exits_with_three() {
    let out = su11(&["run", "--config", &bundled("sui_port1.json"), "--selfcheck", "--tolerance", "1e-15"]);
    assert_eq!(out.status.code(), Some(3));
    // without --selfcheck the table is still written and the run succeeds
    let out = su11(&["run", "--config", &bundled("sui_port1.json"), "--tolerance", "1e-15"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "random.json",
        r#"{"scheme": "sui_port1", "params": {"g1": 0.5}, "sweep": {"parameter": "g2", "from": 0.5, "to": 20, "steps": 16, "spacing": "random"}}"#,
    );
    let run = |threads: &str, seed: &str, name: &str| {
        let path = dir.path().join(name);
        let out = su11(&["sweep", "--config", &cfg, "--seed", seed, "--threads", threads, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(path).unwrap()
    };
    let a = run("1", "42", "a.csv");
    assert_eq!(a, run("4", "42", "b.csv"));
    assert_ne!(a, run("1", "43", "c.csv"));

    let jsf = |name: &str| {
        let out_dir = dir.path().join(name);
        let out = su11(&["jsf", "--config", &bundled("jsf_broadband.json"), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        ["jsf_intensity.csv", "jsf_marginals.csv", "jsf_summary.txt"].map(|f| fs::read(out_dir.join(f)).unwrap())
    };
    assert_eq!(jsf("j1"), jsf("j2"));
}

#[test]
fn jsf_outputs() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("broad");
    let out = su11(&["jsf", "--config", &bundled("jsf_broadband.json"), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let summary = String::from_utf8(out.stdout).unwrap();
    let k: f64 = summary.lines().next().unwrap().strip_prefix("schmidt_number=").unwrap().parse().unwrap();
    assert!(k > 5.0, "{k}");

    let matrix = fs::read_to_string(out_dir.join("jsf_intensity.csv")).unwrap();
    let mut rdr = csv::ReaderBuilder::new().has_headers(false).from_reader(matrix.as_bytes());
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 97);
    assert_eq!(rows[0].len(), 97);
    assert_eq!(rows[0][1].parse::<f64>().unwrap(), -8.0);
    assert_eq!(rows[96][0].parse::<f64>().unwrap(), 8.0);

    let out_dir = dir.path().join("binomial");
    let out = su11(&["jsf", "--config", &bundled("jsf_binomial3.json"), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let marginals = fs::read_to_string(out_dir.join("jsf_marginals.csv")).unwrap();
    let omega = column(&marginals, "omega");
    let signal = column(&marginals, "signal");
    // islands at 4Ωs² = 0 and 2π; the binomial design leaves nothing between
    let next = (std::f64::consts::PI / 2.0).sqrt();
    let secondary = (1..signal.len() - 1)
        .filter(|&k| signal[k] > signal[k - 1] && signal[k] > signal[k + 1])
        .filter(|&k| omega[k] > 0.05 && omega[k] < next - 0.05)
        .count();
    assert_eq!(secondary, 0);

    let bad = write_config(&dir, "bad_jsf.json", r#"{"jsf": {"sigma_p": -1, "points": 10, "half_width": 1}}"#);
    assert_eq!(su11(&["jsf", "--config", &bad]).status.code(), Some(2));
}

#[test]
fn fringe_table() {
    let out = su11(&["fringe", "--config", &bundled("sui_fringe.json")]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 64);
    let (i1, i2) = (column(&text, "i1"), column(&text, "i2"));
    for (a, b) in i1.iter().zip(&i2) {
        assert!((a - b - 100.0).abs() < 1e-9);
    }
    // balanced dark fringe: unit variance at phase π
    let var1 = column(&text, "var1");
    assert!((var1[32] - 1.0).abs() < 1e-9);
}

#[test]
fn selfcheck_passes_on_bundled_configs() {
    let out = su11(&["selfcheck"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert!(!text.contains("FAIL"));
    let names: Vec<String> = fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json") && !n.ends_with(".schema.json"))
        .collect();
    for n in &names {
        assert!(text.contains(&format!("PASS {n}")), "{n} not run by selfcheck");
    }
    let with_env = Command::new(env!("CARGO_BIN_EXE_su11"))
        .args(["selfcheck", "--config", &bundled("pa_bs.json")])
        .env("SU11_NUM_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(with_env.status.code(), Some(0));
}

fn keys_in(schema: &Value, config: &Value, path: &str) {
    let Some(obj) = config.as_object() else { return };
    let props = schema.get("properties").and_then(Value::as_object);
    for (k, v) in obj {
        if k == "kind" {
            continue;
        }
        let Some(sub) = props.and_then(|p| p.get(k)) else {
            panic!("{path}.{k} missing from schema");
        };
        keys_in(sub, v, &format!("{path}.{k}"));
    }
}

#[test]
fn bundled_configs_follow_the_schema() {
    let schema: Value = serde_json::from_str(&fs::read_to_string(configs_dir().join("scenario.schema.json")).unwrap()).unwrap();
    assert_eq!(schema["additionalProperties"], Value::Bool(false));
    for entry in fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.to_str().unwrap().ends_with(".schema.json") {
            continue;
        }
        let config: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        keys_in(&schema, &config, &path.display().to_string());
    }
}
