use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rgdms(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgdms"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// One-vertex config with the given maps, each a low-to-high real coefficient list.
fn one_vertex(dir: &Path, maps: &[(&[(f64, f64)], &[(f64, f64)])]) -> String {
    let edges: Vec<String> = maps
        .iter()
        .enumerate()
        .map(|(k, (num, den))| {
            let c = |v: &[(f64, f64)]| {
                v.iter().map(|(a, b)| format!("[{a:?},{b:?}]")).collect::<Vec<_>>().join(",")
            };
            format!(
                r#"{{"id":"e{k}","from":1,"to":1,"maps":[{{"num":[{}],"den":[{}]}}]}}"#,
                c(num),
                c(den)
            )
        })
        .collect();
    let text = format!(r#"{{"vertices":1,"edges":[{}]}}"#, edges.join(","));
    let path = dir.join("system.json");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const ONE: &[(f64, f64)] = &[(1.0, 0.0)];

#[test]
fn section3_checks_pass_with_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = rgdms(&["check", "--builtin", "section3:5", "--samples", "3000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("BSC CERTIFIED: PASS"));
    assert!(report.contains("overall: PASS"));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn elliptic_generator_fails_checks() {
    let dir = tempfile::tempdir().unwrap();
    // z^2 together with the rotation z -> iz
    let cfg = one_vertex(
        dir.path(),
        &[(&[(0.0, 0.0), (0.0, 0.0), (1.0, 0.0)], ONE), (&[(0.0, 0.0), (0.0, 1.0)], ONE)],
    );
    let out = dir.path().join("out");
    let o = rgdms(&["check", "--config", &cfg, "--samples", "2000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("loxodromic") && l.ends_with("FAIL")));
}

#[test]
fn chebyshev_map_is_not_hyperbolic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = one_vertex(dir.path(), &[(&[(-2.0, 0.0), (0.0, 0.0), (1.0, 0.0)], ONE)]);
    let out = dir.path().join("out");
    let o = rgdms(&["check", "--config", &cfg, "--samples", "2000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("hyperbolic") && l.ends_with("FAIL")));
}

#[test]
fn dim_refuses_failed_checks_without_force() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = one_vertex(dir.path(), &[(&[(-2.0, 0.0), (0.0, 0.0), (1.0, 0.0)], ONE)]);
    let out = dir.path().join("out");
    let o = rgdms(&["dim", "--config", &cfg, "--samples", "2000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!out.join("pressure.tsv").exists());
}

#[test]
fn bad_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let missing = dir.path().join("nope.json");
    let o = rgdms(&["check", "--config", missing.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"vertices": 0, "edges": []}"#).unwrap();
    let o = rgdms(&["check", "--config", bad.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);

    let o = rgdms(&["example", "4", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);

    let o = rgdms(&["check", "--builtin", "section3:5", "--bracket", "2:1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unbracketable_zero_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = rgdms(&[
        "dim", "--builtin", "power:2", "--samples", "2000", "--period", "3", "--bracket", "50:50.001", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4, "{}", stdout(&o));
}

#[test]
fn runs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = rgdms(&[
            "dim", "--builtin", "section3:5", "--samples", "3000", "--period", "3", "--seed", "7", "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        out
    };
    let (a, b) = (run("a"), run("b"));
    for f in ["report.txt", "pressure.tsv", "points_1.txt", "points_3.txt", "julia_2.ppm"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let tsv = fs::read_to_string(a.join("pressure.tsv")).unwrap();
    assert_eq!(tsv.lines().filter(|l| !l.starts_with('#')).count(), 12);
}

#[test]
fn replay_reproduces_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = rgdms(&["check", "--builtin", "power:2", "--samples", "2000", "--seed", "3", "--out", first.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let second = dir.path().join("second");
    let manifest = first.join("manifest.json");
    let o = rgdms(&["replay", manifest.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(
        fs::read(first.join("report.txt")).unwrap(),
        fs::read(second.join("report.txt")).unwrap()
    );
}

#[test]
fn lone_elliptic_mobius_fails_loxodromic_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = one_vertex(dir.path(), &[(&[(0.0, 0.0), (0.0, 1.0)], ONE)]);
    let out = dir.path().join("out");
    let o = rgdms(&["check", "--config", &cfg, "--samples", "2000", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("loxodromic") && l.ends_with("FAIL")));
}
