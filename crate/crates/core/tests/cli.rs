use std::f64::consts::PI;
use std::fs;
use std::process::{Command, Output};

use radlevy::export::read_curve_csv;
use serde_json::Value;

fn radlevy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_radlevy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_lines(text: &str) -> Vec<Value> {
    text.lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn eval_cauchy_density_matches_closed_form() {
    let o = radlevy(&[
        "eval", "--model", "stable12", "--k", "3", "--t", "1", "--what", "density",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_curve_csv(&stdout(&o)).unwrap();
    assert_eq!(header["model"], "stable12");
    assert_eq!(header["atom_weight"], 0.0);
    assert_eq!(header["convention"], "default");
    assert_eq!(header["route"], "mixture");
    assert_eq!(rows.len(), 100);
    for (r, p) in rows {
        let want = 1.0 / (PI * PI) / (1.0 + r * r).powi(2);
        assert!((p - want).abs() <= 1e-8 * want, "r={r}: {p} vs {want}");
    }
}

#[test]
fn eval_f_of_drift() {
    let o = radlevy(&["eval", "--model", "drift", "--what", "f", "--u", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_curve_csv(&stdout(&o)).unwrap();
    assert_eq!(rows, vec![(4.0, 4.0)]);
}

#[test]
fn eval_fourier_gamma_names_the_precondition() {
    let o = radlevy(&[
        "eval", "--model", "gamma", "--k", "1", "--t", "0.3", "--what", "density", "--route", "fourier",
    ]);
    assert_ne!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("Hartman–Wintner"), "{}", stderr(&o));
}

#[test]
fn verify_examples() {
    let o = radlevy(&["verify", "--suite", "dimwalk", "--model", "stable12"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(json_lines(&stdout(&o)).iter().all(|r| r["pass"] == true));

    let o = radlevy(&["verify", "--suite", "all", "--model", "drift"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports = json_lines(&stdout(&o));
    assert!(reports.len() > 10);
    assert!(reports.iter().all(|r| r["schema_version"] == 1));

    let o = radlevy(&["verify", "--suite", "cm", "--model", "synthetic-nonbernstein"]);
    assert_eq!(o.status.code(), Some(1));
    let reports = json_lines(&stdout(&o));
    let last = reports.last().unwrap();
    assert_eq!(last["pass"], false);
    assert_eq!(last["details"]["failed_order"], 2);
}

#[test]
fn verify_hw_over_catalog() {
    let o = radlevy(&["verify", "--suite", "hw"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let verdicts: Vec<(String, String)> = json_lines(&stdout(&o))
        .iter()
        .map(|r| {
            (
                r["model"].as_str().unwrap().into(),
                r["details"]["verdict"].as_str().unwrap().into(),
            )
        })
        .collect();
    assert_eq!(verdicts.len(), 5);
    for (m, v) in verdicts {
        let want = if m == "gamma" || m == "cp" { "fails" } else { "holds" };
        assert_eq!(v, want, "{m}");
    }
}

#[test]
fn simulate_examples() {
    let o = radlevy(&[
        "simulate", "--model", "cp", "--lambda", "2", "--t", "1", "--n", "100000", "--seed", "7",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports = json_lines(&stdout(&o));
    let zero = reports.iter().find(|r| r["statistic"] == "zero_fraction").unwrap();
    let obs = zero["observed"].as_f64().unwrap();
    let se = zero["standard_error"].as_f64().unwrap();
    assert!((obs - (-2f64).exp()).abs() <= 3.0 * se);

    let o = radlevy(&[
        "simulate", "--model", "stable12", "--k", "1", "--t", "1", "--n", "100000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let reports = json_lines(&stdout(&o));
    assert!(reports
        .iter()
        .any(|r| r["statistic"] == "radial_histogram_tv" && r["pass"] == true));

    let o = radlevy(&["simulate", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`n`"));
}

#[test]
fn outputs_are_byte_stable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = dir.path().to_str().unwrap();
        let o = radlevy(&[
            "simulate",
            "--model",
            "gamma",
            "--n",
            "20000",
            "--seed",
            "3",
            "--out",
            out,
            "--samples",
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for file in ["reports.jsonl", "samples.csv"] {
        let x = fs::read(a.path().join(file)).unwrap();
        let y = fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
    }
    let meta: Value = serde_json::from_str(&fs::read_to_string(a.path().join("run_meta.json")).unwrap()).unwrap();
    assert!(meta["timestamp_unix"].as_u64().unwrap() > 0);
    let samples = fs::read_to_string(a.path().join("samples.csv")).unwrap();
    assert!(samples.starts_with("t,sample\n"));
    assert_eq!(samples.lines().count(), 20_001);
}

#[test]
fn threads_do_not_change_results() {
    let one = radlevy(&[
        "simulate",
        "--model",
        "ig",
        "--n",
        "30000",
        "--seed",
        "5",
        "--threads",
        "1",
    ]);
    let three = radlevy(&[
        "simulate",
        "--model",
        "ig",
        "--n",
        "30000",
        "--seed",
        "5",
        "--threads",
        "3",
    ]);
    assert_eq!(one.stdout, three.stdout);
}

#[test]
fn eval_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = radlevy(&[
        "eval", "--model", "ig", "--what", "levy", "--grid-n", "20", "--out", out, "--svg",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_curve_csv(&fs::read_to_string(dir.path().join("levy.csv")).unwrap()).unwrap();
    assert_eq!(header["what"], "levy");
    assert_eq!(rows.len(), 20);
    let svg = fs::read_to_string(dir.path().join("levy.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"model": "drift", "t": -1}"#).unwrap();
    let o = radlevy(&["eval", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`t`"));
    let o = radlevy(&["eval", "--model", "drift", "--convention", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`convention`"));
    let o = radlevy(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}
