use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mprk(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mprk"))
        .args(args)
        .env("MPRK_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

const SMALL: [&str; 4] = ["--set", "omega1.cells=[20,1,20]", "--set", "omega2.cells=[20,1,40]"];

fn small_run(extra: &[&str], out: &Path) -> Output {
    let mut args = vec!["run", "convection2d"];
    args.extend(SMALL);
    args.extend(extra);
    mprk(&args, out)
}

fn run_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

#[test]
fn run_reports_rate_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(&["--scheme=mprk", "--m=4", "--dt=0.025", "--t-end=0.25"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j = run_json(dir.path());
    assert_eq!(j["slow_fast_eval_ratio"], "1:4");
    assert_eq!(j["steps"], 10);
    assert_eq!(j["config"]["run"]["m"], 4);
    let lines = fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert!(lines.starts_with("t,mass,energy,mass_drift,energy_drift\n"));
    assert_eq!(lines.lines().count(), 12);
}

#[test]
fn zero_length_run_writes_initial_snapshot_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(&["--t-end=0"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let mut snaps: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("snapshot"))
        .collect();
    snaps.sort();
    assert_eq!(snaps, ["snapshot_d1_0000000.bin", "snapshot_d2_0000000.bin"]);
}

#[test]
fn snapshot_layout() {
    let dir = tempfile::tempdir().unwrap();
    assert!(small_run(&["--t-end=0"], dir.path()).status.success());
    let bytes = fs::read(dir.path().join("snapshot_d2_0000000.bin")).unwrap();
    let marker = b"end_header\n";
    let pos = bytes.windows(marker.len()).position(|w| w == marker).unwrap();
    let header = String::from_utf8(bytes[..pos].to_vec()).unwrap();
    assert!(header.contains("dims 20 1 40"));
    assert!(header.contains("variables rho rhou rhov rhow rhoE"));
    let data = &bytes[pos + marker.len()..];
    assert_eq!(data.len(), 20 * 40 * 5 * 8);
    let rho0 = f64::from_le_bytes(data[..8].try_into().unwrap());
    assert!(rho0 > 0.9 && rho0 < 1.0);
}

#[test]
fn outputs_are_bitwise_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["--m=2", "--t-end=0.1", "--snapshot-every=2"];
    assert!(small_run(&args, a.path()).status.success());
    let mut threaded = vec!["--threads", "2"];
    threaded.extend(args);
    assert!(small_run(&threaded, b.path()).status.success());
    let names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    let mut compared = 0;
    for n in names {
        if n == "run.json" {
            continue;
        }
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
        compared += 1;
    }
    assert!(compared >= 5);
}

#[test]
fn run_json_config_reruns_identically() {
    let a = tempfile::tempdir().unwrap();
    assert!(small_run(&["--m=4", "--t-end=0.05"], a.path()).status.success());
    let b = tempfile::tempdir().unwrap();
    let summary = a.path().join("run.json");
    let out = mprk(&["run", summary.to_str().unwrap()], b.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let last = "snapshot_d1_0000002.bin";
    assert_eq!(fs::read(a.path().join(last)).unwrap(), fs::read(b.path().join(last)).unwrap());
    assert_eq!(run_json(a.path())["config"], run_json(b.path())["config"]);
}

#[test]
fn toml_file_config() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tempfile::tempdir().unwrap();
    assert!(small_run(&["--t-end=0"], a.path()).status.success());
    let mut cfg = run_json(a.path())["config"].clone();
    let obj = cfg.as_object_mut().unwrap();
    obj.retain(|_, v| !v.is_null());
    let file = tmp.path().join("case.toml");
    fs::write(&file, toml::to_string(&cfg).unwrap()).unwrap();
    let out = mprk(&["run", file.to_str().unwrap(), "--t-end=0.025"], &tmp.path().join("out"));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn missing_field_is_config_error_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tempfile::tempdir().unwrap();
    assert!(small_run(&["--t-end=0"], a.path()).status.success());
    let mut cfg = run_json(a.path())["config"].clone();
    cfg.as_object_mut().unwrap().retain(|_, v| !v.is_null());
    cfg["run"].as_object_mut().unwrap().remove("dt");
    let file = tmp.path().join("broken.toml");
    fs::write(&file, toml::to_string(&cfg).unwrap()).unwrap();
    let out_dir = tmp.path().join("out");
    let out = mprk(&["run", file.to_str().unwrap()], &out_dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
    assert!(!out_dir.exists());
}

#[test]
fn unknown_preset_and_bad_values() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(mprk(&["run", "no-such-preset"], tmp.path()).status.code(), Some(1));
    assert_eq!(small_run(&["--dt=-1"], tmp.path()).status.code(), Some(1));
    assert_eq!(mprk(&["frobnicate"], tmp.path()).status.code(), Some(1));
}

#[test]
fn blow_up_is_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = small_run(&["--scheme=rk2", "--dt=5", "--t-end=50"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn convergence_needs_several_step_sizes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mprk(&["study-convergence", "--dts", "0.025"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    let out = mprk(&["study-convergence", "--dts", "0.025,0.02,0.01"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn convergence_study_on_manufactured_case() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mprk(&["study-convergence", "manufactured", "--dts", "0.05,0.025,0.0125", "--t-end", "0.5"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let j: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("convergence.json")).unwrap()).unwrap();
    for row in j["study"]["rows"].as_array().unwrap().iter().skip(1) {
        for o in row["orders"].as_array().unwrap() {
            let o = o.as_f64().unwrap();
            assert!((o - 2.0).abs() < 0.15, "{o}");
        }
    }
}

#[test]
fn speedup_study_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mprk(&["study-speedup", "--n", "4", "--ms", "1,2,8", "--splits", "0.84", "--steps", "1"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("speedup.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    let m1: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(m1[0], "1");
    assert_eq!(m1[6].parse::<f64>().unwrap(), 1.0);
    assert_eq!(m1[7].parse::<f64>().unwrap(), 1.0);
    assert!(rows.iter().all(|r| r.contains(",true,")));
}

#[test]
fn verify_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = mprk(&["verify"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(!String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
