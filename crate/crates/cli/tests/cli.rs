use std::path::PathBuf;
use std::process::{Command, Output};

use mixcs::ensembles::{gen_matrix, gen_signal, EnsembleKind, EnsembleSpec, SignalSpec};
use mixcs::harness::CSV_COLUMNS;
use mixcs::io::{write_matrix, write_vector};

fn mixcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixcs"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{key} =")))
        .unwrap();
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(mixcs(&["ric", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(mixcs(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        mixcs(&["recover", "-s", "2", "--algorithm", "omp"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn runtime_errors_exit_with_one() {
    let o = mixcs(&["recover", "-s", "2", "--encoder", "/nonexistent/a.txt"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}

#[test]
fn recover_from_fixtures_is_exact_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let (a_path, x_path) = (dir.path().join("a.txt"), dir.path().join("x.txt"));
    let a = gen_matrix(&EnsembleSpec {
        kind: EnsembleKind::Gaussian,
        m: 20,
        d: 40,
        seed: 11,
    })
    .unwrap();
    let x = gen_signal(&SignalSpec {
        d: 40,
        s: 3,
        tail_alpha: 0.0,
        tail_beta: 0.0,
        seed: 12,
    })
    .unwrap();
    write_matrix(&a_path, &a).unwrap();
    write_vector(&x_path, &x).unwrap();
    let (a_arg, x_arg) = (a_path.to_str().unwrap(), x_path.to_str().unwrap());
    for algo in ["cosamp", "bpdn"] {
        let o = mixcs(&[
            "recover",
            "--encoder",
            a_arg,
            "--decoder",
            a_arg,
            "--signal",
            x_arg,
            "-s",
            "3",
            "--algorithm",
            algo,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(
            field(&stdout(&o), "error") <= 1e-6,
            "{algo}: {}",
            stdout(&o)
        );
    }
}

#[test]
fn ric_reports_exact_constants() {
    let o = mixcs(&[
        "ric",
        "--kind",
        "gaussian",
        "--m",
        "30",
        "--d",
        "12",
        "--seed",
        "3",
        "-s",
        "2",
        "--eps-target",
        "0.05",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("method = exact"));
    assert!((field(&text, "eps_sub") - 0.05).abs() <= 1e-9);
    // Over budget only the Monte-Carlo bound is reported.
    let o = mixcs(&[
        "ric",
        "--m",
        "25",
        "--d",
        "50",
        "-s",
        "4",
        "--budget",
        "1000",
        "--samples",
        "500",
    ]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("method = monte_carlo_lower_bound"));
}

#[test]
fn sweep_writes_the_csv_schema_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (out, summary) = (
        dir.path().join("trials.csv"),
        dir.path().join("summary.txt"),
    );
    let o = mixcs(&[
        "sweep",
        "--config",
        config("exact.conf").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--summary",
        summary.to_str().unwrap(),
        "--workers",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
    assert_eq!(lines.count(), 80);
    let text = std::fs::read_to_string(&summary).unwrap();
    assert!(text.contains("cosamp.exact_recovery"));
}

#[test]
fn shipped_configs_parse() {
    for name in ["default.conf", "exact.conf"] {
        let text = std::fs::read_to_string(config(name)).unwrap();
        mixcs::harness::ExperimentConfig::parse(&text)
            .unwrap()
            .validate()
            .unwrap();
    }
}

#[test]
fn check_prints_conditions_and_brackets() {
    let o = mixcs(&[
        "check",
        "--kind",
        "bernoulli",
        "--m",
        "20",
        "--d",
        "16",
        "--seed",
        "5",
        "-s",
        "2",
        "--eps-target",
        "0.01",
        "--noise-level",
        "0.05",
        "--tail-alpha",
        "0.01",
        "--tail-beta",
        "0.01",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for key in ["bp_ric_limit", "eps_total_bp", "bracket_cosamp"] {
        assert!(text.contains(key), "missing {key} in\n{text}");
    }
}
