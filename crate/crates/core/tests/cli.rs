use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn riemvi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riemvi")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

#[test]
fn list_subcommands() {
    let o = riemvi(&["list-problems"]);
    assert_eq!(code(&o), 0);
    let names: Vec<_> = stdout(&o).lines().map(str::to_owned).collect();
    assert!(names.contains(&"decoupled_saddle".to_owned()));
    assert_eq!(names.len(), 5);

    let o = riemvi(&["list-methods"]);
    assert_eq!(code(&o), 0);
    for m in ["REG", "RPEG", "RCEG", "ROGDA", "RGDA"] {
        assert!(stdout(&o).lines().any(|l| l.starts_with(m)), "{m} missing");
    }
}

#[test]
fn run_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write(
        dir.path(),
        "c.toml",
        "methods = [\"REG\"]\niterations = 400\n[problem]\nname = \"decoupled_saddle\"\n",
    );
    let o = riemvi(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("summary.json").exists());
    let trace = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "csv"))
        .expect("a trace csv");

    let o = riemvi(&["fit", trace.to_str().unwrap(), "--metric", "op_norm"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let fit: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(fit["slope"].as_f64().unwrap() < 0.0);

    let o = riemvi(&["fit", trace.to_str().unwrap(), "--metric", "nonsense"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn overrides_reach_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = riemvi(&[
        "run",
        configs().join("sphere_bilinear.toml").to_str().unwrap(),
        "--set",
        "iterations=50",
        "--set",
        "methods=[\"RCEG\"]",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<_> = stdout(&o).lines().filter(|l| l.starts_with("RCEG")).map(str::to_owned).collect();
    assert_eq!(lines.len(), 1);
}

#[test]
fn bad_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = riemvi(&["run", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(code(&missing), 1);

    let cfg = write(dir.path(), "a.toml", "methods = [\"XYZ\"]\n[problem]\nname = \"decoupled_saddle\"\n");
    let o = riemvi(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("RPEG"));

    let cfg = write(dir.path(), "b.toml", "methods = [\"REG\"]\n[problem]\nname = \"decoupled_saddle\"\n");
    let o = riemvi(&["validate", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn diverging_method_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "methods = [\"RGDA\"]\netas = 0.5\niterations = 200\n[problem]\nname = \"euclidean_bilinear\"\nmodes = 2\nlambda_min = 1.0\n",
    );
    let out = dir.path().join("out");
    let o = riemvi(&["run", cfg.to_str().unwrap(), "--output-dir", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn validate_writes_per_lemma_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("v");
    let o = riemvi(&[
        "validate",
        configs().join("validators.toml").to_str().unwrap(),
        "--set",
        "validators.probes=100",
        "--output-dir",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("validate_summary.json").exists());
    let csvs = fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().starts_with("validate_"))
        .count();
    assert!(csvs > 7);
}
