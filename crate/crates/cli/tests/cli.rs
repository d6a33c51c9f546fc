use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ferrolab"));
    cmd.env_remove("FERROLAB_OUT").env("RUST_LOG", "warn");
    cmd
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ferrolab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SCRIPT: &str = "let v = 1\nrepeat 3 {\n    bias v\n    wait 2\n    measure\n}\nsave T, ZC22\n";

#[test]
fn check_accepts_clean_script() {
    let dir = scratch("check-ok");
    fs::write(dir.join("ok.ffx"), SCRIPT).unwrap();
    let o = run_in(&dir, &["check", "ok.ffx"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 errors"));
    assert!(!dir.join("ferrolab-out").exists());
}

#[test]
fn check_rejects_bad_script() {
    let dir = scratch("check-bad");
    fs::write(dir.join("bad.ffx"), "bias 12\n").unwrap();
    let o = run_in(&dir, &["check", "bad.ffx"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("bad.ffx:1:"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = scratch("usage");
    assert_eq!(run_in(&dir, &["bogus"]).status.code(), Some(1));
    assert_eq!(run_in(&dir, &["experiment", "hysteresis", "--loops", "x"]).status.code(), Some(1));
}

#[test]
fn help_shows_defaults() {
    let dir = scratch("help");
    let o = run_in(&dir, &["experiment", "hysteresis", "--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("[default: 50]"));
    assert!(text.contains("[default: 3.8]"));
}

#[test]
fn missing_model_is_reported() {
    let dir = scratch("serve");
    let o = run_in(&dir, &["prc-serve", "--model", "missing.bin", "--port", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ModelNotFound"));
    let manifest = fs::read_to_string(dir.join("ferrolab-out/manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"failed\""));
}

#[test]
fn hysteresis_writes_full_log_and_manifest() {
    let dir = scratch("hyst");
    let o = run_in(&dir, &["--out", "a", "experiment", "hysteresis", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let log = fs::read_to_string(dir.join("a/log.csv")).unwrap();
    assert_eq!(log.lines().count(), 7651 + 1);
    let manifest = fs::read_to_string(dir.join("a/manifest.json")).unwrap();
    assert!(manifest.contains("\"status\": \"ok\""));
    assert!(manifest.contains("\"seed\": 7"));
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "manifest.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn runs_are_reproducible_and_replayable() {
    let dir = scratch("replay");
    fs::write(dir.join("s.ffx"), SCRIPT).unwrap();
    for out in ["a", "b"] {
        let o = run_in(&dir, &["--out", out, "--seed", "3", "run", "s.ffx"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let o = run_in(&dir, &["--out", "c", "replay", "a/manifest.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let a = files(&dir.join("a"));
    assert!(!a.is_empty());
    assert_eq!(a, files(&dir.join("b")));
    assert_eq!(a, files(&dir.join("c")));
}

#[test]
fn out_dir_comes_from_environment() {
    let dir = scratch("env");
    fs::write(dir.join("s.ffx"), SCRIPT).unwrap();
    let o = bin()
        .current_dir(&dir)
        .env("FERROLAB_OUT", "from-env")
        .args(["run", "s.ffx"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.join("from-env/log.csv").is_file());
}

#[test]
fn set_overrides_device_parameters() {
    let dir = scratch("set");
    fs::write(dir.join("s.ffx"), SCRIPT).unwrap();
    run_in(&dir, &["--out", "a", "run", "s.ffx"]);
    let o = run_in(&dir, &["--out", "b", "--set", "r_arm=2000", "run", "s.ffx"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_ne!(fs::read(dir.join("a/script.csv")).unwrap(), fs::read(dir.join("b/script.csv")).unwrap());
}

#[test]
fn reservoir_pipeline_round_trips() {
    let dir = scratch("prc");
    let o = run_in(&dir, &["--out", "c", "prc-collect", "--reps", "5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run_in(&dir, &["--out", "t", "prc-train", "--samples", "c/samples.csv", "--epochs", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.join("t/model.bin").is_file());
}
