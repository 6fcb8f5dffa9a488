use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn longtrack(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_longtrack"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn summary_value(dir: &Path, column: &str) -> f64 {
    let text = fs::read_to_string(dir.join("summary.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == column).unwrap();
    row[i].parse().unwrap()
}

#[test]
fn evaluate_perfect_fixture_scores_one() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("groundtruth.txt");
    let pred = tmp.path().join("pred.txt");
    fs::write(&gt, "10,10,20,20\n12,11,20,20\nabsent\n15,12,22,20\n").unwrap();
    fs::write(&pred, "10,10,20,20,1\n12,11,20,20,0.9\nabsent,0.05\n15,12,22,20,0.8\n").unwrap();
    let out = tmp.path().join("report");
    let o = longtrack(&["evaluate", "--pred", arg(&pred), "--gt", arg(&gt), "--out", arg(&out), "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(summary_value(&out, "f_score"), 1.0);
    assert_eq!(summary_value(&out, "success_auc"), 1.0);
    for f in ["pr_curve.csv", "success.csv", "pr_curve.svg", "success.svg"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
}

#[test]
fn print_config_lists_defaults_and_reloads() {
    let o = longtrack(&["track", "--print-config"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("th_mid = 0.5"));
    assert!(text.contains("detector_enabled = true"));

    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("cfg.toml");
    fs::write(&cfg, &text).unwrap();
    let again = longtrack(&["track", "--config", arg(&cfg), "--print-config"]);
    assert!(again.status.success());
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
}

#[test]
fn simulate_track_evaluate_roundtrip() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = tmp.path().join("scene.toml");
    fs::write(
        &spec,
        "name = \"walk\"\nlength = 30\ntrajectory = [{ frame = 0, x = 100.0, y = 110.0 }, { frame = 30, x = 130.0, y = 120.0 }]\n",
    )
    .unwrap();
    let seq = tmp.path().join("seq");
    let o = longtrack(&["simulate", "--spec", arg(&spec), "--seed", "5", "--out", arg(&seq)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(seq.join("sequence.meta").is_file());
    assert!(seq.join("00000029.pgm").is_file());

    let pred = tmp.path().join("pred.txt");
    let o = longtrack(&["track", "--sequence", arg(&seq), "--out", arg(&pred)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&pred).unwrap().lines().count(), 30);
    assert_eq!(fs::read_to_string(tmp.path().join("pred.log")).unwrap().lines().count(), 30);

    let second = tmp.path().join("again.txt");
    longtrack(&["track", "--sequence", arg(&seq), "--out", arg(&second)]);
    assert_eq!(fs::read(&pred).unwrap(), fs::read(&second).unwrap());

    let rep = tmp.path().join("rep");
    let o = longtrack(&["evaluate", "--pred", arg(&pred), "--gt", arg(&seq), "--out", arg(&rep)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(summary_value(&rep, "success_auc") > 0.7);
    let summary = fs::read_to_string(rep.join("summary.csv")).unwrap();
    assert!(summary.lines().nth(1).unwrap().starts_with("walk,"));
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.txt");
    let cases: Vec<Vec<&str>> = vec![
        vec!["evaluate", "--pred", arg(&missing), "--gt", arg(&missing), "--out", arg(tmp.path())],
        vec!["simulate", "--standard", "no-such-scenario", "--out", arg(tmp.path())],
        vec!["track", "--out", arg(&missing)],
    ];
    for args in cases {
        let o = longtrack(&args);
        assert!(!o.status.success(), "{args:?} succeeded");
        let err = String::from_utf8(o.stderr).unwrap();
        assert_eq!(err.trim_end().lines().count(), 1, "{err}");
        assert!(err.starts_with("error: "), "{err}");
    }

    let bad = tmp.path().join("bad.toml");
    fs::write(&bad, "th_mdi = 0.5\n").unwrap();
    let o = longtrack(&["track", "--config", arg(&bad), "--print-config"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("th_mdi"));
}
