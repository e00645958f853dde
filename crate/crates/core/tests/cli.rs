use std::process::{Command, Output};

use qsc_core::cli::{HistogramReport, SweepTable};

fn qsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qsc"))
        .args(args)
        .env_remove("QSC_SEED")
        .output()
        .expect("spawn qsc")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn analytic_sweep_succeeds() {
    let out = qsc(&["--mode", "sweep", "--grid", "0.5:1.0:6", "--trials", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("alpha_sq,F1_analytic,F2_analytic,F3_analytic\n"));
    let table = SweepTable::from_csv(&text).unwrap();
    assert_eq!(table.rows.len(), 6);
    let last = &table.rows[5];
    assert_eq!(last.alpha_sq, 1.0);
    assert_eq!(last.analytic, [Some(1.0); 3]);
}

#[test]
fn fixed_seed_is_byte_identical() {
    let args = [
        "--mode", "sweep", "--grid", "0.8:0.9:2", "--trials", "20000", "--seed", "17",
    ];
    let a = qsc(&args);
    let b = qsc(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let other = qsc(&[
        "--mode", "sweep", "--grid", "0.8:0.9:2", "--trials", "20000", "--seed", "18",
    ]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn seed_from_environment() {
    let args = ["--mode", "histogram", "--alpha-sq", "0.9", "--trials", "5000"];
    let with_env = Command::new(env!("CARGO_BIN_EXE_qsc"))
        .args(args)
        .env("QSC_SEED", "5")
        .output()
        .unwrap();
    let with_flag = qsc(&[&args[..], &["--seed", "5"]].concat());
    assert!(with_env.status.success());
    assert_eq!(with_env.stdout, with_flag.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_qsc"))
        .args(args)
        .env("QSC_SEED", "not-a-number")
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn histogram_round_trips_and_merges() {
    let out = qsc(&[
        "--mode", "histogram", "--alpha-sq", "0.9046", "--trials", "20000", "--seed", "1",
        "--merge-d45", "true",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("label,D0,D1,D2,D3,D4+D5,D6\n"));
    let report = HistogramReport::from_csv(&text, 0.9046).unwrap();
    assert_eq!(report.counts.len(), 8);
    assert!(report.estimate.value > 0.85 && report.estimate.value < 1.0);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    let out_path = dir.path().join("out.csv");
    std::fs::write(
        &cfg,
        format!(
            "# analytic sweep\nmode = sweep\ngrid = 0.5:1.0:3\ntrials = 0\nout = {}\n",
            out_path.display()
        ),
    )
    .unwrap();
    let out = qsc(&["--config", cfg.to_str().unwrap(), "--grid", "0.6:0.8:2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&out_path).unwrap();
    let table = SweepTable::from_csv(&written).unwrap();
    let grid: Vec<f64> = table.rows.iter().map(|r| r.alpha_sq).collect();
    assert_eq!(grid, vec![0.6, 0.8]);
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let unwritable = dir.path().join("missing-dir").join("out.csv");
    let cases: Vec<Vec<String>> = vec![
        vec!["--out".into(), unwritable.display().to_string(), "--trials".into(), "0".into()],
        vec!["--mode".into(), "histogram".into(), "--trials".into(), "0".into()],
        vec!["--grid".into(), "0.0:1.0:3".into()],
        vec!["--alpha-sq".into(), "1.5".into(), "--mode".into(), "point".into()],
        vec!["--visibility=-0.1".into()],
        vec!["--protocols".into(), "P4".into()],
        vec!["--config".into(), dir.path().join("absent.conf").display().to_string()],
        vec!["--no-such-flag".into()],
    ];
    for args in cases {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = qsc(&refs);
        assert!(!out.status.success(), "{args:?} should fail");
        assert!(!out.stderr.is_empty(), "{args:?} should explain");
    }
}
