use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypomodel"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Real and imaginary parts from `... = re im i`.
fn printed_value(s: &str) -> (f64, f64) {
    let line = s.lines().next().unwrap();
    let rhs = line.split(" = ").nth(1).unwrap();
    let mut parts = rhs.split_whitespace();
    let re = parts.next().unwrap().parse().unwrap();
    let im = parts.next().unwrap().trim_end_matches('i').parse().unwrap();
    (re, im)
}

fn moments(csv: &str) -> Vec<(i64, f64, f64)> {
    csv.lines()
        .skip(1)
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap(), v[2].parse().unwrap())
        })
        .collect()
}

#[test]
fn kernel_h_on_the_disk() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kernel", "H", "0.1", "0.2", "--domain", "disk"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (re, im) = printed_value(&stdout(&o));
    assert!((re - 1.0 / 0.98).abs() < 1e-14 && im.abs() < 1e-14);
    assert!(stdout(&o).contains("backend"));
}

#[test]
fn kernel_e_far_away_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kernel", "E", "1e6", "1e6i"], dir.path());
    assert!(o.status.success());
    let (re, im) = printed_value(&stdout(&o));
    assert!((re - 1.0).abs() < 1e-9 && im.abs() < 1e-9);
}

#[test]
fn kernel_region_mismatch_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["kernel", "H", "2", "3", "--domain", "disk"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn disk_moments() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["moments", "--domain", "disk", "--order", "4"], dir.path());
    assert!(o.status.success());
    let rows = moments(&fs::read_to_string(dir.path().join("moments.csv")).unwrap());
    assert_eq!(rows.last().unwrap().0, 4);
    for (k, re, im) in rows {
        let want = if k == 0 { 1.0 } else { 0.0 };
        assert!((re - want).abs() < 1e-14 && im.abs() < 1e-14, "M_{k}");
    }
}

#[test]
fn ellipse_moments() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["moments", "--domain", "ellipse", "--a", "2", "--b", "1", "--order", "6"], dir.path());
    assert!(o.status.success());
    let rows = moments(&fs::read_to_string(dir.path().join("moments.csv")).unwrap());
    let m = |k: i64| rows.iter().find(|r| r.0 == k).unwrap();
    assert!((m(0).1 - 2.0).abs() < 1e-12);
    assert!((m(2).1 - 1.5).abs() < 1e-12);
    assert!(m(1).1.abs() < 1e-12);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["moments", "--order", "-3"][..],
        &["moments", "--domain", "ellipse", "--a", "1", "--b", "2"],
        &["field", "--source", "0,0", "--grid", "1,2,3"],
        &["field", "--source", "5,0", "--grid", "1.5,2,1.5,2,0.25"],
        &["verify", "--tol", "2"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn point_source_field_is_one_over_z() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["field", "--source", "0,0", "--grid", "1.5,3,1.5,3,0.25"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    let mut n = 0;
    for l in csv.lines().skip(1) {
        let v: Vec<f64> = l.split(',').map(|t| t.parse().unwrap()).collect();
        let z = 1.0 / (v[0] * v[0] + v[1] * v[1]);
        assert!((v[2] - v[0] * z).abs() < 1e-13 && (v[3] + v[1] * z).abs() < 1e-13);
        n += 1;
    }
    assert_eq!(n, 49);
}

#[test]
fn null_density_gives_a_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["field", "--density", "1,0,1,0", "--grid", "1.5,3,1.5,3,0.5"], dir.path());
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    for l in csv.lines().skip(1) {
        let speed: f64 = l.rsplit(',').next().unwrap().parse().unwrap();
        assert!(speed < 1e-12);
    }
}

fn report_without_runtimes(dir: &Path) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    for r in v["records"].as_array_mut().unwrap() {
        r.as_object_mut().unwrap().remove("runtime_ms");
    }
    v
}

#[test]
fn operators_on_the_disk_pass_and_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["verify", "--domain", "disk", "--suite", "operators", "--order", "4", "--seed", "7"];
    let (oa, ob) = (run(&args, a.path()), run(&args, b.path()));
    assert_eq!(oa.status.code(), Some(0), "{}", stdout(&oa));
    assert_eq!(ob.status.code(), Some(0));
    let ra = report_without_runtimes(a.path());
    assert_eq!(ra, report_without_runtimes(b.path()));
    let rank_one = ra["records"].as_array().unwrap().iter().find(|r| r["name"] == "commutator rank one").unwrap();
    assert_eq!(rank_one["status"], "pass");
    assert!(a.path().join("report.txt").exists());
}

#[test]
fn ellipse_nulls_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--domain", "ellipse", "--a", "2", "--b", "1", "--suite", "nulls"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn identity_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // four-point sections cannot resolve the commutator norm on the ellipse
    let o = run(
        &["verify", "--domain", "ellipse", "--a", "2", "--b", "1", "--suite", "operators", "--order", "4"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}
