use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn iceberg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iceberg")).args(args).env("ICEBERG_WORKERS", "1").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("iceberg-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn lists_and_shows_codes() {
    let o = iceberg(&["codes", "list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["c422", "c1224", "c2026", "c4848"] {
        assert!(text.contains(name), "{text}");
    }
    let o = iceberg(&["codes", "show", "c422", "--raw"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("XXXX"));
    assert!(!iceberg(&["codes", "show", "bogus"]).status.success());
}

#[test]
fn distance_by_enumeration() {
    let o = iceberg(&["codes", "distance", "c1224"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains('4'));
}

#[test]
fn run_writes_csv() {
    let dir = scratch("run");
    let spec = dir.join("tiny.spec");
    fs::write(&spec, "[cap]\nkind = code-capacity\ncode = c1224\np = 0.01, 0.05\n").unwrap();
    let out = dir.join("out");
    let o = iceberg(&["run", spec.to_str().unwrap(), "--shots", "2000", "--seed", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("tiny.csv")).unwrap();
    assert!(csv.starts_with("# iceberg-rates v1"));
    assert_eq!(csv.lines().filter(|l| l.contains("c1224")).count(), 2);

    let again = iceberg(&["run", spec.to_str().unwrap(), "--shots", "2000", "--seed", "3"]);
    assert_eq!(stdout(&again), csv);
}

#[test]
fn bad_specs_fail() {
    let dir = scratch("bad");
    let spec = dir.join("bad.spec");
    fs::write(&spec, "kind = repeated-ec\ncode = c1224\np = 2.0\n").unwrap();
    assert!(!iceberg(&["run", spec.to_str().unwrap()]).status.success());
    assert!(!iceberg(&["run", dir.join("missing.spec").to_str().unwrap()]).status.success());
}

#[test]
fn verify_flags_tampered_code_files() {
    let dir = scratch("verify");
    let raw = stdout(&iceberg(&["codes", "show", "c1224", "--raw"]));
    let good = dir.join("c1224.txt");
    fs::write(&good, &raw).unwrap();
    let o = iceberg(&["verify", "--code-file", good.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));

    let mut lines: Vec<String> = raw.lines().map(str::to_string).collect();
    let row = lines.iter().position(|l| l.contains('X') && l.contains('I')).unwrap();
    lines[row] = lines[row].replacen('X', "Z", 1);
    let bad = dir.join("tampered").join("c1224.txt");
    fs::create_dir_all(bad.parent().unwrap()).unwrap();
    fs::write(&bad, lines.join("\n") + "\n").unwrap();
    let o = iceberg(&["verify", "--code-file", bad.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(stdout(&o).contains("FAIL"));
}
