use std::process::{Command, Output};

fn qeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qeom")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const H2_DUMP: &str = "&FCI NORB=2,NELEC=2,MS2=0,
 ORBSYM=1,5,
 ISYM=1,
&END
  0.6757101548 1 1 1 1
  0.6645817238 2 2 1 1
  0.1809270275 2 1 2 1
  0.6985643726 2 2 2 2
 -1.2563390730 1 1 0 0
 -0.4718960244 2 2 0 0
  0.7137539936 0 0 0 0
";

#[test]
fn excite_h2_matches_exact_gap() {
    let out = qeom(&["excite", "--builtin", "h2", "--r", "1.4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    let sd = &v["variants"][0];
    assert_eq!(sd["variant"], "sd");
    assert!(sd["error_ha"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn config_file_and_set_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "builtin = h2\nr = 1.0\nmethod = qeom\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = qeom(&[
        "excite",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "method=qse",
        "--output-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["method"], "qse");
    assert!(out_dir.join("result_qse.json").exists());
}

#[test]
fn ground_reports_exact_energy() {
    let out = qeom(&["ground", "--builtin", "h2", "--r", "2.0"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["error_ha"].as_f64().unwrap().abs() < 1e-8);
    assert_eq!(v["operators"].as_array().unwrap().len(), 1);
}

#[test]
fn scan_writes_csv_rows() {
    let out = qeom(&["scan", "--builtin", "h2", "--scan", "1.0,1.4,2.0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().starts_with("parameter"));
}

#[test]
fn validation_errors_exit_with_two() {
    let bad = [
        vec!["excite", "--builtin", "h2", "--screening-f", "0.5"],
        vec!["excite", "--builtin", "h2", "--variant", "sdt-screened"],
        vec!["excite", "--builtin", "h2", "--set", "no_such_key=1"],
        vec!["excite"],
        vec!["excite", "--builtin", "h2", "--screening-mode", "coverage", "--screening-f", "1.5"],
    ];
    for args in &bad {
        let out = qeom(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn fcidump_info_summarizes_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h2.fcidump");
    std::fs::write(&path, H2_DUMP).unwrap();
    let out = qeom(&["fcidump-info", path.to_str().unwrap(), "--point-group", "D2h"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["n_orbitals"], 2);
    assert_eq!(v["n_electrons"], 2);
    assert_eq!(v["n_qubits"], 4);
    assert_eq!(v["orbital_irreps"][0], "Ag");
    assert_eq!(v["orbital_irreps"][1], "B1u");
}

#[test]
fn fcidump_run_recovers_exact_gap() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("h2.fcidump");
    std::fs::write(&path, H2_DUMP).unwrap();
    let out = qeom(&["excite", "--fcidump", path.to_str().unwrap(), "--point-group", "D2h"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["variants"][0]["error_ha"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn screen_emits_ranked_entries() {
    let dir = tempfile::tempdir().unwrap();
    let out = qeom(&[
        "screen",
        "--builtin",
        "h8",
        "--b",
        "1.0",
        "--set",
        "adapt_max_iters=2",
        "--oracle",
        "false",
        "--output-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 292);
    let w: Vec<f64> = entries.iter().map(|e| e["w"].as_f64().unwrap().abs()).collect();
    assert!(w.windows(2).all(|p| p[0] >= p[1]));
    assert!(dir.path().join("coverage_qeom.csv").exists());
}
