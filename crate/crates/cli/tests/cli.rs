use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bbm_core::field::read_snapshot;
use serde_json::{json, Value};

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn bbm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbm"))
        .args(args)
        .env("BBM_OUTPUT_DIR", out)
        .output()
        .unwrap()
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn small_config() -> Value {
    json!({
        "variant": "A",
        "domain": {"kind": "torus", "n_points": 64},
        "initial_condition": {"kind": "single_mode", "amplitude": 0.5, "wavenumber": 1},
        "damping": {"kind": "bump", "center": 3.141592653589793, "radius": 1.0, "amplitude": 1.0},
        "integrator": "onestep",
        "dt": 0.01,
        "horizon": 2.0,
        "record_stride": 10,
        "snapshot_stride": 20,
        "tolerances": {"decay_window": 0.2},
        "output_dir": "unused"
    })
}

fn parse_csv(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn reference_config_reproduces_baseline_ledger() {
    let out = tempfile::tempdir().unwrap();
    let cfg = repo_root().join("configs/reference_variant_a.json");
    let o = bbm(&["simulate", cfg.to_str().unwrap()], out.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let produced = out.path().join("ledger.csv");
    let baseline = repo_root().join("configs/baselines/reference_variant_a_ledger.csv");
    let header = fs::read_to_string(&produced).unwrap();
    assert!(header.starts_with("t,E,mean,D,cumD,residual\n"));
    let (a, b) = (parse_csv(&produced), parse_csv(&baseline));
    assert_eq!(a.len(), b.len());
    for (ra, rb) in a.iter().zip(&b) {
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "ok");
    assert_eq!(report["decay"]["monotone"], true);
    assert_eq!(report["decay"]["sample_times"].as_array().unwrap().len(), 11);
}

#[test]
fn zero_initial_data_gives_a_ledger_of_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_config();
    v["initial_condition"] = json!({"kind": "constant", "value": 0.0});
    let cfg = write_config(dir.path(), "zero.json", &v);
    let out = dir.path().join("out");
    let o = bbm(&["simulate", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0));
    let rows = parse_csv(&out.join("ledger.csv"));
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().all(|r| r[1..].iter().all(|&x| x == 0.0)));
}

#[test]
fn snapshots_use_the_field_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &small_config());
    let out = dir.path().join("out");
    assert!(bbm(&["simulate", cfg.to_str().unwrap()], &out).status.success());
    let snaps: Vec<_> = fs::read_dir(out.join("snapshots")).unwrap().collect();
    assert_eq!(snaps.len(), 11);
    let text = fs::read_to_string(out.join("snapshots/snapshot_00010.csv")).unwrap();
    assert!(text.starts_with("# t=2.0000000000000000e0 domain=torus n=64 L=6.2831853071795862e0\n"));
    let (t, field) = read_snapshot(text.as_bytes()).unwrap();
    assert_eq!(t, 2.0);
    assert_eq!(field.values().len(), 64);
}

#[test]
fn invalid_config_exits_2_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_config();
    v["variant"] = json!("C");
    v["feedback"] = json!({"alpha": 1.0, "beta": 0.0});
    v.as_object_mut().unwrap().remove("damping");
    let cfg = write_config(dir.path(), "bad.json", &v);
    let o = bbm(&["simulate", cfg.to_str().unwrap()], &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("domain"));
    assert!(!dir.path().join("out").exists());

    let o = bbm(&["simulate", "/nonexistent/config.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = bbm(&["verify", "everything"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn integrator_failure_exits_3_with_failure_time() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = small_config();
    v["initial_condition"] = json!({"kind": "single_mode", "amplitude": 1e3, "wavenumber": 3});
    v["dt"] = json!(1.0);
    v["horizon"] = json!(200.0);
    let cfg = write_config(dir.path(), "blow.json", &v);
    let out = dir.path().join("out");
    let o = bbm(&["simulate", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "failed");
    assert!(report["failure_time"].as_f64().unwrap() >= 0.0);
}

#[test]
fn damping_table_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.csv"), "x,a\n0,0\n2,0\n3,1\n4,0\n6.2,0\n").unwrap();
    let mut v = small_config();
    v["damping"] = json!({"kind": "table", "path": "a.csv"});
    let cfg = write_config(dir.path(), "table.json", &v);
    let out = dir.path().join("out");
    let o = bbm(&["simulate", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = parse_csv(&out.join("ledger.csv"));
    assert!(rows.last().unwrap()[4] > 0.0);
}

#[test]
fn verify_operators_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = bbm(&["verify", "operators"], dir.path());
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 7);
    assert!(!text.contains("FAIL"));
}

fn sweep_config(dir: &Path, values: Value) -> PathBuf {
    write_config(dir, "base.json", &small_config());
    write_config(
        dir,
        "sweep.json",
        &json!({
            "base": "base.json",
            "parameters": [{"path": "damping.amplitude", "values": values}],
            "workers": 2,
            "output_dir": "unused"
        }),
    )
}

#[test]
fn amplitude_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), json!([0.0, 0.1, 1.0, 10.0]));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(bbm(&["sweep", cfg.to_str().unwrap()], &a).status.success());
    assert!(bbm(&["sweep", cfg.to_str().unwrap()], &b).status.success());
    let sa = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert_eq!(sa, fs::read_to_string(b.join("summary.csv")).unwrap());
    let lines: Vec<&str> = sa.lines().collect();
    assert_eq!(lines[0], "cell,damping.amplitude,status,final_h1_distance,total_dissipation,tail_last,error");
    assert_eq!(lines.len(), 5);
    // amplitude 0 is the undamped equation: nothing dissipated
    let zero: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(zero[2], "ok");
    assert_eq!(zero[4].parse::<f64>().unwrap(), 0.0);
    assert!(a.join("cell_0003/ledger.csv").exists());
}

#[test]
fn single_cell_sweep_matches_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = sweep_config(dir.path(), json!([1.0]));
    let out = dir.path().join("sweep");
    assert!(bbm(&["sweep", cfg.to_str().unwrap()], &out).status.success());
    let sim = dir.path().join("sim");
    assert!(bbm(&["simulate", dir.path().join("base.json").to_str().unwrap()], &sim).status.success());
    assert_eq!(
        fs::read_to_string(out.join("cell_0000/ledger.csv")).unwrap(),
        fs::read_to_string(sim.join("ledger.csv")).unwrap()
    );
}

#[test]
fn failing_cells_are_recorded_not_fatal() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = small_config();
    base["dt"] = json!(1.0);
    base["horizon"] = json!(200.0);
    base["initial_condition"] = json!({"kind": "single_mode", "amplitude": 0.5, "wavenumber": 3});
    write_config(dir.path(), "base.json", &base);
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        &json!({
            "base": "base.json",
            "parameters": [{"path": "initial_condition.amplitude", "values": [0.01, 1e3]}],
            "output_dir": "unused"
        }),
    );
    let out = dir.path().join("out");
    let o = bbm(&["sweep", cfg.to_str().unwrap()], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert!(rows[0].contains(",ok,"));
    assert!(rows[1].contains(",failed,"));
}

#[test]
fn sweep_rejects_unknown_parameter_paths() {
    let dir = tempfile::tempdir().unwrap();
    write_config(dir.path(), "base.json", &small_config());
    let cfg = write_config(
        dir.path(),
        "sweep.json",
        &json!({"base": "base.json", "parameters": [{"path": "damping.width", "values": [1.0]}], "output_dir": "x"}),
    );
    let o = bbm(&["sweep", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("damping.width"));
}
