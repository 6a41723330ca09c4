use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fmradar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fmradar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_succeeds_and_reports_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("a.cfg");
    fs::write(&cfg, "channel_count = 1\nseparation_m = 3000\nmethod = IFFT\n").unwrap();
    let out = dir.path().join("o");
    let run = fmradar(&["simulate", "--config", s(&cfg), "--out", s(&out)]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.contains("wrote "));
    assert!(out.join("profile.csv").exists());
    assert!(out.join("manifest.txt").exists());
}

#[test]
fn missing_keys_fail_with_one_error_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.cfg");
    fs::write(&cfg, "# nothing\n").unwrap();
    let run = fmradar(&["simulate", "--config", s(&cfg), "--out", s(dir.path())]);
    assert!(!run.status.success());
    let stderr = String::from_utf8(run.stderr).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    assert!(lines[0].starts_with("error kind=missing_keys"));
    for key in ["channel_count", "separation_m", "method"] {
        assert!(lines[0].contains(key));
    }
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let run = fmradar(&["simulate", "--config", s(&dir.path().join("absent.cfg"))]);
    assert!(!run.status.success());
    assert!(String::from_utf8(run.stderr).unwrap().starts_with("error kind=io"));
}

#[test]
fn fig10_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = fmradar(&["fig10", "--iterations", "1", "--seed", "5", "--out", s(out)]);
        assert!(run.status.success());
    }
    for name in ["error_curve.csv", "manifest.txt", "config.cfg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let manifest = fs::read_to_string(a.join("manifest.txt")).unwrap();
    assert!(manifest.contains("low_confidence = true"));
}

#[test]
fn seed_flag_changes_the_realization() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("a.cfg");
    fs::write(&cfg, "channel_count = 1\nseparation_m = 3000\nmethod = MUSIC\n").unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    fmradar(&["simulate", "--config", s(&cfg), "--out", s(&a), "--seed", "1"]);
    fmradar(&["simulate", "--config", s(&cfg), "--out", s(&b), "--seed", "2"]);
    assert_ne!(
        fs::read(a.join("pseudospectrum.csv")).unwrap(),
        fs::read(b.join("pseudospectrum.csv")).unwrap()
    );
}

#[test]
fn unknown_subcommand_is_rejected() {
    assert!(!fmradar(&["fig99"]).status.success());
}
