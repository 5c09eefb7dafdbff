use std::fs;
use std::path::Path;
use std::process::Command;

fn mlsa(args: &[&str], out: &Path, threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mlsa"));
    cmd.args(args).arg("--out").arg(out);
    match threads {
        Some(t) => cmd.env("MLSA_THREADS", t),
        None => cmd.env_remove("MLSA_THREADS"),
    };
    cmd.output().expect("run mlsa")
}

#[test]
fn writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = mlsa(
        &["strong-rate", "--n", "4,8", "--reps", "2000"],
        dir.path(),
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("strong-rate.csv")).unwrap();
    assert!(csv.starts_with("n,mse,se,paths\n"));
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("strong-rate.svg").exists());
    assert!(dir.path().join("strong-rate_fit.csv").exists());
}

#[test]
fn no_svg_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = mlsa(
        &["strong-rate", "--n", "4", "--reps", "100", "--no-svg"],
        dir.path(),
        None,
    );
    assert!(out.status.success());
    assert!(!dir.path().join("strong-rate.svg").exists());
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["histogram", "--reps", "0"],
        &["frontier", "--problem", "quantile"],
        &["histogram", "--method", "sa-rp", "--n", "4", "--reps", "2"],
        &[
            "histogram",
            "--problem",
            "quantile",
            "--gamma0",
            "2",
            "--n",
            "4",
            "--reps",
            "2",
        ],
        &[
            "frontier",
            "--problem",
            "call-level",
            "--method",
            "ml",
            "--n",
            "100",
            "--reps",
            "2",
        ],
    ];
    for args in cases {
        let out = mlsa(args, dir.path(), None);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stderr).contains("configuration error"));
    }
    let out = mlsa(
        &["strong-rate", "--n", "4", "--reps", "10"],
        dir.path(),
        Some("0"),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_usage_is_rejected_by_the_parser() {
    let dir = tempfile::tempdir().unwrap();
    let out = mlsa(&["histogram", "--method", "mlmc"], dir.path(), None);
    assert!(!out.status.success());
    let out = mlsa(&["histogram", "--beta", "half"], dir.path(), None);
    assert!(!out.status.success());
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = mlsa(
        &[
            "weak-error",
            "--problem",
            "call-level",
            "--gamma0",
            "1e300",
            "--n",
            "4",
            "--steps",
            "20",
            "--reps",
            "1",
            "--mc",
            "10",
        ],
        dir.path(),
        None,
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("non-finite"));
}

#[test]
fn worker_count_does_not_change_output() {
    let args = [
        "histogram",
        "--problem",
        "call-level",
        "--method",
        "sa,sr,ml",
        "--n",
        "16",
        "--reps",
        "24",
        "--seed",
        "9",
    ];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(mlsa(&args, a.path(), Some("1")).status.success());
    assert!(mlsa(&args, b.path(), Some("3")).status.success());
    for f in ["histogram.csv", "histogram_summary.csv", "histogram.svg"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}
