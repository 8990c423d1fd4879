use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FIXTURE: &str = r#"
[potential]
terms = [{ b = 0.25, p = 4.0 }]
b0 = 0.25

[solve]
n = 12
delta = 1e-3

[sweep]
n_list = [8, 12]
tau_list = [0.5, 1.0]

[linear]
d = 2
nu_min = 100.0
nu_max = 104.0
p_list = [2.0, 4.0, 6.0]
"#;

fn wgm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wgm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn bessel_values() {
    let o = wgm(&["bessel", "--nu", "0", "--x", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "1 0\n");

    let o = wgm(&["bessel", "--nu", "0.5", "--x", "3.141592653589793"]);
    let j: f64 = stdout(&o).split_whitespace().next().unwrap().parse().unwrap();
    assert!(j.abs() < 1e-15);

    let o = wgm(&["bessel", "--nu", "100", "--x", "108.6"]);
    let v: Vec<f64> = stdout(&o).split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert!(v[0].abs() < 0.02 && v[1] < 0.0);
}

#[test]
fn bessel_rejects_bad_flags() {
    assert_eq!(wgm(&["bessel", "--nu", "0.3", "--x", "1"]).status.code(), Some(2));
    assert_eq!(wgm(&["bessel", "--nu", "1"]).status.code(), Some(2));
    assert_eq!(wgm(&["bessel", "--nu", "1", "--x", "abc"]).status.code(), Some(2));
    assert_eq!(wgm(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn zeros_output() {
    let o = wgm(&["zeros", "--nu", "0", "--count", "1"]);
    let z: f64 = stdout(&o).trim().parse().unwrap();
    assert!((z - 2.404825557695773).abs() < 1e-15);

    let o = wgm(&["zeros", "--nu", "0.5", "--count", "2"]);
    let z: Vec<f64> = stdout(&o).lines().map(|l| l.parse().unwrap()).collect();
    assert!((z[0] - std::f64::consts::PI).abs() < 1e-14);
    assert!((z[1] - 2.0 * std::f64::consts::PI).abs() < 1e-14);

    let o = wgm(&["zeros", "--nu", "100", "--count", "1"]);
    let z: f64 = stdout(&o).trim().parse().unwrap();
    assert!(z > 108.0 && z < 109.0);
}

#[test]
fn oracle_suites() {
    let o = wgm(&["oracle", "--suite", "lommel"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("lommel: 18/18 passed\n"));
    let o = wgm(&["oracle", "--suite", "gradient"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(wgm(&["oracle", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn linear_verify_rows_and_empty_range() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", FIXTURE);
    let o = wgm(&["linear-verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",true")));

    let empty = FIXTURE.replace("nu_max = 104.0", "nu_max = 99.0");
    let cfg = write_config(dir.path(), "empty.toml", &empty);
    let o = wgm(&["linear-verify", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).starts_with("d,n,nu,lambda,"));
}

#[test]
fn solve_fixture_is_certified_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", FIXTURE);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = wgm(&["solve", "--config", &cfg, "--out", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let residual: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("residual "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(residual <= 1e-8);
    wgm(&["solve", "--config", &cfg, "--out", b.to_str().unwrap()]);
    for f in ["solution.txt", "w.txt", "phi.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn solve_rejects_invalid_potential_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let bad = FIXTURE.replace("p = 4.0", "p = 2.0");
    let cfg = write_config(dir.path(), "bad.toml", &bad);
    let o = wgm(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid potential"));

    let extra = format!("{FIXTURE}\n[extra]\nx = 1\n");
    let cfg = write_config(dir.path(), "extra.toml", &extra);
    assert_eq!(wgm(&["solve", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn sweep_csv_svg_and_missing_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", FIXTURE);
    let svg = dir.path().join("out.svg");
    let c1 = dir.path().join("one.csv");
    let c4 = dir.path().join("four.csv");
    let o = wgm(&[
        "--threads", "1", "sweep", "--config", &cfg, "--out", c1.to_str().unwrap(), "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let o = wgm(&["--threads", "4", "sweep", "--config", &cfg, "--out", c4.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(&c1).unwrap();
    assert_eq!(csv, fs::read_to_string(&c4).unwrap());
    assert_eq!(csv.lines().count(), 5);
    let doc = fs::read_to_string(&svg).unwrap();
    assert!(doc.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
    assert!(doc.trim_end().ends_with("</svg>"));
    assert_eq!(doc.matches("<polyline").count(), 2);

    let missing = dir.path().join("missing.toml");
    let o = wgm(&["sweep", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
