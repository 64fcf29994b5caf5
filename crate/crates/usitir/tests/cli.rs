//! End-to-end checks of the command-line interface.

use std::process::{Command, Output};

fn usitir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_usitir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = usitir(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    serde_json::from_str(&stdout(args)).expect("valid json output")
}

#[test]
fn work_table_i_row() {
    let v = json(&["work", "--set", "F2", "--state", "|10>"]);
    assert!((v["work"].as_f64().unwrap()).abs() < 1e-10);
    assert!((v["uncontrollable_entropy"].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn work_optimal_bell() {
    let v = json(&["work", "--set", "C2", "--state", "bell-phi+"]);
    assert!((v["work"].as_f64().unwrap() - 4.0f64.ln()).abs() < 1e-10);
    assert!(v["is_optimal"].as_bool().unwrap());
}

#[test]
fn work_product_state_lossless_under_common_drive() {
    let v = json(&["work", "--set", "G2", "--state", "spectrum:0.7,0.3⊗spectrum:0.7,0.3"]);
    assert!(v["uncontrollable_entropy"].as_f64().unwrap() < 1e-9);
}

#[test]
fn tables_rows() {
    let text = stdout(&["tables"]);
    assert!(text.contains("ln 4"));
    assert!(text.contains("ln 3"));
    let v = json(&["tables", "--format", "json"]);
    let dist = v["distinguishable"].as_array().unwrap();
    assert_eq!(dist.len(), 4);
    assert!((dist[0]["work"].as_f64().unwrap() - 4.0f64.ln()).abs() < 1e-10);
    let boson = v["boson"].as_array().unwrap();
    assert!((boson[1]["s_u_bits"].as_f64().unwrap() - 3.0f64.log2()).abs() < 1e-10);
    // relabeling symmetry
    assert_eq!(dist[1]["s_u_bits"], dist[2]["s_u_bits"]);
}

#[test]
fn cycle_single_qubit() {
    let v = json(&["cycle", "--engine", "1mqihe", "--c", "0.9", "--steps", "10000"]);
    assert!(v["relative_deviation"].as_f64().unwrap() <= 1e-4);

    let v = json(&["cycle", "--engine", "1mqihe", "--c", "0", "--steps", "100"]);
    assert_eq!(v["final_work"].as_f64().unwrap(), 0.0);
}

#[test]
fn cycle_two_qubit_werner() {
    let v = json(&["cycle", "--engine", "2mqihe", "--state", "werner:0.5", "--steps", "4000"]);
    assert!(v["relative_deviation"].as_f64().unwrap() <= 1e-4);
}

#[test]
fn cycle_csv_output() {
    let text = stdout(&[
        "cycle", "--engine", "1mqihe", "--c", "0.5", "--steps", "50", "--format", "csv",
    ]);
    assert!(text.starts_with("t,stage,B,mu_z,R,E_battery\n"));
    assert!(text.lines().count() > 100);
}

#[test]
fn control_reports() {
    let v = json(&["control", "--set", "C2"]);
    assert_eq!(v["lie_closure_dim"], 15);
    assert_eq!(v["dmc"], true);

    let v = json(&["control", "--set", "L2"]);
    assert_eq!(v["lie_closure_dim"], 6);
    assert_eq!(v["dmc"], false);

    let v = json(&["control", "--set", "F2", "--state", "spectrum:0.5,0.3,0.15,0.05"]);
    assert_eq!(v["ct"]["found"], false);
}

#[test]
fn oracle_matches_closed_form() {
    let v = json(&["oracle", "--set", "G2", "--state", "werner:0.5", "--restarts", "8"]);
    assert!(v["difference_bits"].as_f64().unwrap().abs() < 1e-3);
}

#[test]
fn deterministic_json_per_seed() {
    let args = ["oracle", "--set", "L2", "--state", "werner:0.4", "--restarts", "6", "--seed", "3"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn scenario_file_drives_commands() {
    let dir = std::env::temp_dir().join("usitir-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scenario.json");
    std::fs::write(
        &path,
        r#"{"schema": 1, "engine": "2mqihe", "control_set": "C2",
            "input_state": "werner:0.5", "steps": 2000}"#,
    )
    .unwrap();
    let v = json(&["cycle", "--scenario", path.to_str().unwrap()]);
    assert_eq!(v["engine"], "2mqihe");
    assert!(v["relative_deviation"].as_f64().unwrap() <= 1e-4);

    let v = json(&["work", "--scenario", path.to_str().unwrap()]);
    assert!((v["work"].as_f64().unwrap() - v["optimal_work"].as_f64().unwrap()).abs() < 1e-10);
}

#[test]
fn errors_name_the_violated_rule() {
    let out = usitir(&["work", "--set", "L2", "--state", "occupation:1", "--statistics", "boson"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("control set"), "stderr: {err}");

    let out = usitir(&["cycle", "--engine", "2mqihe", "--state", "|00>"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.to_lowercase().contains("pure"), "stderr: {err}");

    let out = usitir(&["work", "--set", "Q7", "--state", "|00>"]);
    assert!(!out.status.success());

    let out = usitir(&["cycle", "--engine", "1mqihe", "--c", "1.5"]);
    assert!(!out.status.success());
}

#[test]
fn clamp_flag_unlocks_pure_inputs() {
    let v = json(&[
        "cycle", "--engine", "2mqihe", "--state", "|00>", "--clamp", "1e-6", "--steps", "8000",
    ]);
    assert!((v["final_work"].as_f64().unwrap() - 4.0f64.ln()).abs() < 1e-2);
}
