//! Drives the built binary: output shapes, exit codes and file handling.

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn specact(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_specact"))
        .args(args)
        .env_remove("SPECACT_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("specact-cli-{}-{name}", std::process::id()))
}

#[test]
fn thermo_json_is_one_object() {
    let o = specact(&[
        "thermo",
        "--stat",
        "fermi",
        "--spectrum",
        "circle:200",
        "--beta",
        "1",
        "--mu",
        "-1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for key in ["beta", "log_z", "entropy", "energy", "tail_bound"] {
        assert!(v[key].is_number(), "missing {key}");
    }
    let (lz, s, e) = (
        v["log_z"].as_f64().unwrap(),
        v["entropy"].as_f64().unwrap(),
        v["energy"].as_f64().unwrap(),
    );
    // S = ln Z + βE at β = 1
    assert!((s - lz - e).abs() < 1e-12 * s);
}

#[test]
fn thermo_grid_gives_one_csv_row_per_beta() {
    let o = specact(&[
        "thermo",
        "--stat",
        "bose",
        "--spectrum",
        "torus:2:30",
        "--beta",
        "0.5:2:0.5",
        "--mu",
        "-0.5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.split("\r\n").filter(|l| !l.is_empty()).collect();
    assert_eq!(lines[0], "beta,log_z,entropy,energy,tail_bound");
    assert_eq!(lines.len(), 5);
}

#[test]
fn coefficient_representations_agree_within_their_estimates() {
    let o = specact(&[
        "coeff",
        "--kind",
        "gamma",
        "--a",
        "0.5,1.5",
        "--mu",
        "-0.5",
        "--rep",
        "bessel,poisson",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 4);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0]["rep"], "bessel");
        assert_eq!(pair[1]["rep"], "poisson");
        let gap = (pair[0]["value"].as_f64().unwrap() - pair[1]["value"].as_f64().unwrap()).abs();
        let est = pair[0]["est_error"].as_f64().unwrap() + pair[1]["est_error"].as_f64().unwrap();
        assert!(gap <= est, "gap {gap:e} above estimate {est:e}");
    }
}

#[test]
fn bad_configuration_exits_two_and_names_the_flag() {
    let cases: [(&[&str], &str); 3] = [
        (
            &[
                "thermo",
                "--stat",
                "fermi",
                "--spectrum",
                "sphere:3",
                "--beta",
                "1",
                "--mu",
                "-1",
            ],
            "--spectrum",
        ),
        (
            &[
                "thermo",
                "--stat",
                "fermi",
                "--spectrum",
                "circle:5",
                "--beta",
                "1",
                "--mu",
                "1",
            ],
            "--mu",
        ),
        (
            &[
                "thermo",
                "--stat",
                "fermi",
                "--spectrum",
                "circle:5",
                "--beta",
                "0,1",
                "--mu",
                "-1",
            ],
            "--beta",
        ),
    ];
    for (args, flag) in cases {
        let o = specact(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains(flag), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn bad_thread_count_exits_two() {
    let o = Command::new(env!("CARGO_BIN_EXE_specact"))
        .args(["verify", "--only", "1"])
        .env("SPECACT_THREADS", "x")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("SPECACT_THREADS"));
}

#[test]
fn numerical_failure_exits_one() {
    let o = specact(&["coeff", "--kind", "gamma", "--a", "0.5", "--mu", "-4", "--rep", "xi"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("domain"), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
}

#[test]
fn spectrum_file_and_output_file() {
    let spec = scratch("modes.txt");
    let body: String = (1..=100).map(|n| format!("{n},2\n")).collect();
    std::fs::write(&spec, format!("# |n| with both signs folded in\n{body}")).unwrap();
    let out = scratch("thermo.csv");
    let from_file = specact(&[
        "thermo",
        "--stat",
        "fermi",
        "--spectrum",
        &format!("file:{}", spec.display()),
        "--beta",
        "0.8",
        "--mu",
        "-0.3",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(from_file.status.code(), Some(0), "{}", stderr(&from_file));
    assert!(from_file.stdout.is_empty());
    let generated = specact(&[
        "thermo",
        "--stat",
        "fermi",
        "--spectrum",
        "circle:100",
        "--beta",
        "0.8",
        "--mu",
        "-0.3",
    ]);
    let written = std::fs::read_to_string(&out).unwrap();
    // same entropy up to summation order
    let entropy = |s: &str| -> f64 { s.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap() };
    let (a, b) = (entropy(&written), entropy(&stdout(&generated)));
    assert!((a - b).abs() < 1e-14 * b, "{a} vs {b}");
    std::fs::remove_file(spec).ok();
    std::fs::remove_file(out).ok();
}

#[test]
fn expand_reports_partial_sums() {
    let o = specact(&[
        "expand",
        "--stat",
        "fermi",
        "--variant",
        "linear",
        "--mu",
        "-1",
        "--beta",
        "0.1",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 3);
    let sum: f64 = rows.iter().map(|r| r["value"].as_f64().unwrap()).sum();
    let last = rows.last().unwrap()["partial_sum"].as_f64().unwrap();
    assert!((sum - last).abs() < 1e-14 * last.abs());
}

#[test]
fn compare_is_repeatable() {
    let args = [
        "compare",
        "--stat",
        "bose",
        "--mu",
        "-1",
        "--beta",
        "0.2,0.1",
        "--spectrum",
        "circle:1500",
    ];
    let a = specact(&args);
    let b = specact(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("beta,exact,expansion,abs_err,rel_err,slope,last_term_power\r\n"));
}

#[test]
fn verify_subset_passes() {
    let o = specact(&["verify", "--only", "2,1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let checks: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    // requested order is kept
    assert_eq!(checks.first(), Some(&"2"));
    assert_eq!(checks.last(), Some(&"1"));
}
