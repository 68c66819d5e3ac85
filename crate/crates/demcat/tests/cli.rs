//! End-to-end runs of the command line binary: files, exit codes,
//! determinism, golden figure comparison, and prime field parity.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_demcat"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = bin().args(args).output().expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).to_string(),
        String::from_utf8_lossy(&out.stderr).to_string(),
    )
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap_or_else(|_| panic!("missing {name}"))
}

#[test]
fn build_writes_objects_and_quiver() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let (code, stdout, _) = run(&["build", "--n", "2", "--d", "2", "--out-dir", out_dir]);
    assert_eq!(code, 0);
    assert!(stdout.contains("8 indecomposable objects"));
    let objects: serde_json::Value = serde_json::from_str(&read(dir.path(), "objects.json")).unwrap();
    assert_eq!(objects.as_array().unwrap().len(), 8);
    let dot = read(dir.path(), "ar.dot");
    assert!(dot.contains("\"P(0,1)\" -> \"P(0,2)\";"));
    assert!(dot.contains("style=dashed"));

    let (code, stdout, _) = run(&["build", "--n", "3", "--d", "2", "--out-dir", out_dir]);
    assert_eq!(code, 0);
    assert!(stdout.contains("15 indecomposable objects"));

    let (code, stdout, _) = run(&["build", "--n", "2", "--d", "1", "--out-dir", out_dir]);
    assert_eq!(code, 0);
    assert!(stdout.contains("5 indecomposable objects"));
}

#[test]
fn build_is_deterministic() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    for dir in [&dir1, &dir2] {
        let (code, _, _) = run(&["build", "--n", "2", "--d", "2", "--out-dir", dir.path().to_str().unwrap()]);
        assert_eq!(code, 0);
    }
    assert_eq!(read(dir1.path(), "objects.json"), read(dir2.path(), "objects.json"));
    assert_eq!(read(dir1.path(), "ar.dot"), read(dir2.path(), "ar.dot"));
}

#[test]
fn ct_check_accepts_and_rejects() {
    let (code, stdout, _) = run(&["ct-check", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("is a (2+1)-cluster tilting object"));
    let (code, stdout, _) = run(&["ct-check", "--n", "2", "--d", "2", "-M", "P(0,1)"]);
    assert_eq!(code, 1);
    assert!(stdout.contains("NOT cluster tilting"));
}

#[test]
fn quotient_guard_and_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    // a non cluster tilting object is refused without --force
    let (code, _, stderr) = run(&["quotient", "--n", "2", "--d", "2", "-M", "P(0,1)", "--out-dir", out_dir]);
    assert_eq!(code, 1);
    assert!(stderr.contains("not cluster tilting"));
    // and accepted with --force
    let (code, _, _) = run(&["quotient", "--n", "2", "--d", "2", "-M", "P(0,1)", "--out-dir", out_dir, "--force"]);
    assert_eq!(code, 0);
    // the real quotient
    let (code, stdout, _) = run(&["quotient", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)", "--out-dir", out_dir]);
    assert_eq!(code, 0);
    assert!(stdout.contains("6 surviving objects"));
    assert!(stdout.contains("Frobenius: true"));
    let dot = read(dir.path(), "quotient_ar.dot");
    assert!(dot.contains("\"P(0,2)\" -> \"P(1,1)\";"));
    let homs: serde_json::Value = serde_json::from_str(&read(dir.path(), "homs.json")).unwrap();
    assert_eq!(homs.as_array().unwrap().len(), 36 * 2);
}

#[test]
fn lambda_and_dem_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let (code, stdout, _) = run(&["lambda", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)", "--out-dir", out_dir]);
    assert_eq!(code, 0);
    assert!(stdout.contains("zero differential: true"));
    let dump: serde_json::Value = serde_json::from_str(&read(dir.path(), "lambda.json")).unwrap();
    assert_eq!(dump["dims_by_degree"]["0"], 2);
    assert_eq!(dump["dims_by_degree"]["-1"], 2);
    let (code, _, _) = run(&["dem", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)", "--out-dir", out_dir]);
    assert_eq!(code, 0);
    let rows: serde_json::Value = serde_json::from_str(&read(dir.path(), "dem_modules.json")).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 6);
}

#[test]
fn verify_with_golden_and_negative_control() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    // produce the true adjacency from a fresh build, then feed it back
    let (code, _, _) = run(&["verify", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)", "--out-dir", out_dir]);
    assert_eq!(code, 0);
    let report: serde_json::Value = serde_json::from_str(&read(dir.path(), "verify_report.json")).unwrap();
    assert_eq!(report["overall"], true);
    assert_eq!(report["frobenius"], true);
    assert_eq!(report["pairs_checked"], 72);

    // golden comparison: correct file passes
    let golden = serde_json::json!({
        "ar": golden_ar(),
        "quotient_ar": golden_quotient()
    });
    let golden_path = dir.path().join("golden.json");
    std::fs::write(&golden_path, serde_json::to_string(&golden).unwrap()).unwrap();
    let (code, _, _) = run(&[
        "verify", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)",
        "--out-dir", out_dir, "--golden", golden_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);

    // corrupted golden file: diff reported, exit 1
    let mut corrupted = golden.clone();
    corrupted["ar"]["P(0,1)"] = serde_json::json!({"P(3,2)": 1});
    let bad_path = dir.path().join("golden_bad.json");
    std::fs::write(&bad_path, serde_json::to_string(&corrupted).unwrap()).unwrap();
    let (code, stdout, _) = run(&[
        "verify", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)",
        "--out-dir", out_dir, "--golden", bad_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert!(stdout.contains("golden mismatch"));
}

fn golden_ar() -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for j in 0..4 {
        let mut row1 = serde_json::Map::new();
        row1.insert(format!("P({j},2)"), serde_json::json!(1));
        map.insert(format!("P({j},1)"), serde_json::Value::Object(row1));
        let mut row2 = serde_json::Map::new();
        row2.insert(format!("P({},1)", (j + 1) % 4), serde_json::json!(1));
        map.insert(format!("P({j},2)"), serde_json::Value::Object(row2));
    }
    serde_json::Value::Object(map)
}

fn golden_quotient() -> serde_json::Value {
    serde_json::json!({
        "P(0,2)": {"P(1,1)": 1},
        "P(1,1)": {"P(1,2)": 1},
        "P(1,2)": {},
        "P(2,2)": {"P(3,1)": 1},
        "P(3,1)": {"P(3,2)": 1},
        "P(3,2)": {}
    })
}

#[test]
fn prime_field_reproduces_dimension_tables() {
    let dir_q = tempfile::tempdir().unwrap();
    let dir_p = tempfile::tempdir().unwrap();
    for (dir, field) in [(&dir_q, "Q"), (&dir_p, "Fp:2")] {
        let (code, _, _) = run(&[
            "quotient", "--n", "2", "--d", "2", "-M", "P(0,1)+P(2,1)",
            "--field", field, "--out-dir", dir.path().to_str().unwrap(),
        ]);
        assert_eq!(code, 0, "field {field}");
    }
    assert_eq!(read(dir_q.path(), "homs.json"), read(dir_p.path(), "homs.json"));
    assert_eq!(read(dir_q.path(), "quotient_ar.dot"), read(dir_p.path(), "quotient_ar.dot"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("session.toml");
    std::fs::write(
        &cfg,
        "n = 2\nd = 2\nM = \"P(0,1)+P(2,1)\"\nfield = \"Q\"\n",
    )
    .unwrap();
    let (code, stdout, _) = run(&[
        "build",
        "--config",
        cfg.to_str().unwrap(),
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("8 indecomposable"));
    // the flag wins over the file
    let (code, stdout, _) = run(&[
        "build",
        "--config",
        cfg.to_str().unwrap(),
        "--n",
        "3",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("15 indecomposable"));
}

#[test]
fn usage_errors_exit_two() {
    let (code, _, stderr) = run(&["build", "--d", "2"]);
    assert_eq!(code, 2);
    assert!(stderr.contains("missing --n"));
    let (code, _, _) = run(&["build", "--n", "2", "--d", "2", "--field", "Z"]);
    assert_eq!(code, 2);
    let (code, _, _) = run(&["quotient", "--n", "2", "--d", "2", "-M", "P(9,9)"]);
    assert_eq!(code, 2);
}

#[test]
fn selfinj_command() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout, _) = run(&[
        "selfinj", "--n", "3", "--d", "2", "-M", "P(0,1)+P(0,2)+P(3,1)",
        "--out-dir", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.contains("agree: true"));
    let dump: serde_json::Value = serde_json::from_str(&read(dir.path(), "selfinj.json")).unwrap();
    assert_eq!(dump["add_shift_criterion"], false);
    assert_eq!(dump["probe"]["positive"], false);
}
