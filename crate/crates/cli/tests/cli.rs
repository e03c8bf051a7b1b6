use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn topdc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topdc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> String {
    root().join("configs").join(name).display().to_string()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn reference_rates_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&topdc(&["--config", &config("table1.cfg"), "--json", "rate"], dir.path()));
    let scenarios = doc["scenarios"].as_array().unwrap();
    let checked: Vec<&Value> = scenarios.iter().filter(|s| s.get("reference").is_some()).collect();
    assert_eq!(checked.len(), 6);
    for s in checked {
        assert_eq!(s["reference"]["within_tolerance"], Value::Bool(true), "{}", s["name"]);
    }
    for s in scenarios {
        let name = s["name"].as_str().unwrap();
        let written: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap()).unwrap();
        assert_eq!(&written, s);
    }
    let csv = fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(csv.lines().count(), scenarios.len() + 1);
}

#[test]
fn scaling_exponents_match() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&topdc(&["--config", &config("table2.cfg"), "--json", "sweep"], dir.path()));
    let sweeps = doc["sweeps"].as_array().unwrap();
    assert_eq!(sweeps.len(), 20);
    for s in sweeps {
        assert_eq!(s["reference"]["within_tolerance"], Value::Bool(true), "{s}");
        let name = s["name"].as_str().unwrap();
        assert!(dir.path().join(format!("{name}.svg")).exists());
        let rows = fs::read_to_string(dir.path().join(format!("{name}.csv"))).unwrap();
        assert_eq!(rows.lines().count(), 10);
    }
}

#[test]
fn phase_match_and_bandwidth_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let pm = json(&topdc(&["--config", &config("table1.cfg"), "--json", "phasematch"], dir.path()));
    let lf = pm["phasematch"][0]["wavelengths_um"]["fundamental"].as_f64().unwrap();
    assert!((lf - 1.72).abs() < 0.01, "{lf}");

    let bw = json(&topdc(&["--config", &config("table1.cfg"), "--json", "--seed", "3", "bandwidth"], dir.path()));
    assert_eq!(bw["seed"], 3);
    let r = &bw["bandwidth"][0]["results"];
    let numeric = r["numeric"]["tau_inv"].as_f64().unwrap();
    let mc = r["monte_carlo"]["tau_inv"].as_f64().unwrap();
    assert!((mc / numeric - 1.0).abs() < 0.02, "{mc} vs {numeric}");
    assert_eq!(r["monte_carlo"]["seed"], 3);
}

#[test]
fn overlap_of_gaussian_modes() {
    let dir = tempfile::tempdir().unwrap();
    let doc = json(&topdc(&["--config", &config("table1.cfg"), "--json", "overlap"], dir.path()));
    let area = doc["overlap"][0]["area_um2"].as_f64().unwrap();
    assert!(area > 1.0 && area < 20.0, "{area}");
    assert!(dir.path().join("overlap.json").exists());
}

#[test]
fn repeated_runs_are_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--config", &config("table1.cfg"), "--json", "rate"];
    let first = topdc(&args, a.path());
    let second = topdc(&args, b.path());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(a.path().join("rates.csv")).unwrap(), fs::read(b.path().join("rates.csv")).unwrap());
}

#[test]
fn thread_count_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("table2.cfg");
    let one = topdc(&["--config", &cfg, "--json", "--threads", "1", "sweep"], a.path());
    let four = topdc(&["--config", &cfg, "--json", "--threads", "4", "sweep"], b.path());
    assert_eq!(json(&one), json(&four));
    assert_eq!(
        fs::read(a.path().join("ring_st_q_seed.csv")).unwrap(),
        fs::read(b.path().join("ring_st_q_seed.csv")).unwrap()
    );
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    let devices = r#"
[devices.wg]
kind = "waveguide"
length = "1 cm"
gamma = { triplet = 0.19 }
"#;
    fs::write(&path, format!("{devices}\n{body}")).unwrap();
    path.display().to_string()
}

#[test]
fn config_without_jobs_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = topdc(&["--config", &cfg, "rate"], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no scenario"));
}

#[test]
fn unknown_device_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[[scenario]]\nname = \"a\"\ndevice = \"nope\"\nprocess = \"sp_degenerate\"\npump_power = \"1 mW\"\n",
    );
    let out = topdc(&["--config", &cfg, "rate"], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn physics_failure_names_the_scenario() {
    let dir = tempfile::tempdir().unwrap();
    // No dispersion tables and no injected bandwidth: nothing to integrate.
    let cfg = write_config(
        dir.path(),
        "[[scenario]]\nname = \"no_dispersion\"\ndevice = \"wg\"\nprocess = \"sp_degenerate\"\npump_power = \"100 mW\"\nwavelengths = { pump = \"0.57 um\" }\nbandwidth = \"numeric\"\n",
    );
    let out = topdc(&["--config", &cfg, "rate"], &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no_dispersion"));
}

#[test]
fn single_point_sweep_has_no_chart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[[scenario]]
name = "base"
device = "wg"
process = "sp_degenerate"
pump_power = "100 mW"
wavelengths = { pump = "0.57 um" }
bandwidth = "2.9e4 GHz"

[[sweep]]
name = "one"
scenario = "base"
parameter = "length"
from = "1 cm"
to = "1 cm"
points = 1
"#,
    );
    let out_dir = dir.path().join("out");
    let doc = json(&topdc(&["--config", &cfg, "--json", "sweep"], &out_dir));
    assert!(doc["sweeps"][0]["exponent"].is_null());
    assert!(out_dir.join("one.csv").exists());
    assert!(!out_dir.join("one.svg").exists());
}

#[test]
fn bundled_tables_match_the_reference_dispersion() {
    let data = root().join("data");
    assert_eq!(fs::read_to_string(data.join("fundamental.csv")).unwrap(), topdc::sample::fundamental_table(161).to_csv());
    assert_eq!(fs::read_to_string(data.join("pump.csv")).unwrap(), topdc::sample::pump_table(161).to_csv());
}
