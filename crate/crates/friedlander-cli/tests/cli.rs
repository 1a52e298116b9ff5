use std::path::PathBuf;
use std::process::{Command, Output};

use clap::Parser;
use friedlander_cli::commands::{airy_table, local_maxima, read_airy_table};
use friedlander_cli::config::{parse_window, RunConfig};
use friedlander_cli::output::fmt_f64;
use friedlander_cli::{merged_config, Cli, CliError};
use friedlander::parametrix::NWindow;
use friedlander::verify::SupPoint;
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_friedlander"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("friedlander-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn airy_table_round_trips() {
    let out = run(&["airy-table", "--kmax", "50"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 51);
    let table = read_airy_table(&out.stdout).unwrap();
    assert_eq!(table.k_max(), 50);
    let again = airy_table(50).unwrap().to_bytes();
    assert_eq!(again, out.stdout);
    let direct = friedlander::airy::AiryTable::new(50).unwrap();
    assert_eq!(table.zeros(), direct.zeros());
    assert_eq!(table.l_prime(), direct.l_prime());
}

#[test]
fn poisson_json_passes() {
    let out = run(&["poisson-check", "--center", "2", "--nmax", "32"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["rel_error"].as_f64().unwrap() <= 1e-4);
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
}

#[test]
fn failed_check_exits_one() {
    let out = run(&["poisson-check", "--nmax", "8", "--tol", "1e-12"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["green-eval", "--h", "2"]).status.code(), Some(2));
    assert_eq!(run(&["compare-paths", "--gamma", "0.125", "--a", "0.05"]).status.code(), Some(2));
    assert_eq!(run(&["envelope-report", "--prop", "eq:none"]).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(2));
    let bad = scratch("bad.toml");
    std::fs::write(&bad, "[model]\nhh = 1\n").unwrap();
    assert_eq!(run(&["--config", bad.to_str().unwrap(), "airy-table"]).status.code(), Some(2));
}

#[test]
fn numerical_errors_map_to_three() {
    let e: CliError = friedlander::Error::NonConvergence {
        partial: friedlander::C64::new(1.0, 2.0),
        err_estimate: 0.5,
        evaluations: 10,
    }
    .into();
    assert_eq!(e.exit_code(), 3);
    let d: serde_json::Value = serde_json::from_str(&e.diagnostic().unwrap()).unwrap();
    assert_eq!(d["error"], "non_convergence");
    assert_eq!(d["evaluations"], 10);
    let u: CliError = friedlander::Error::Regime(String::from("x")).into();
    assert_eq!(u.exit_code(), 2);
    assert!(u.diagnostic().is_none());
}

#[test]
fn precedence_flags_over_file_over_defaults() {
    let path = scratch("prec.toml");
    std::fs::write(&path, "[model]\nh = 0.04\ngamma = 0.2\n[poisson]\nnmax = 16\nwidth = 0.8\n").unwrap();
    let p = path.to_str().unwrap();
    let cli = Cli::parse_from(["friedlander", "--config", p, "--h", "0.03", "poisson-check", "--nmax", "64"]);
    let c = merged_config(&cli).unwrap();
    assert_eq!(c.model.h, 0.03);
    assert_eq!(c.model.gamma, 0.2);
    assert_eq!(c.model.a, RunConfig::default().model.a);
    assert_eq!(c.poisson.nmax, 64);
    assert_eq!(c.poisson.width, 0.8);
    assert_eq!(c.poisson.center, 2);
}

#[test]
fn dump_config_reloads() {
    let out = run(&["--dump-config", "--gamma", "0.125", "--a", "0.1", "caustic-scan", "--n", "1,3"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let c = RunConfig::from_toml(&text).unwrap();
    assert_eq!(c.model.gamma, 0.125);
    assert_eq!(c.caustic.n, vec![1, 3]);
    let d = RunConfig::default();
    assert_eq!(RunConfig::from_toml(&d.to_toml()).unwrap(), d);
}

#[test]
fn windows_parse() {
    assert_eq!(parse_window("fixed:3").unwrap(), NWindow::Fixed(3));
    assert_eq!(parse_window("adaptive").unwrap(), NWindow::default());
    assert_eq!(parse_window("lemma:2.5:1").unwrap(), NWindow::Lemma { c0: 2.5, slack: 1 });
    assert!(parse_window("sometimes").is_err());
    assert!(parse_window("fixed").is_err());
}

#[test]
fn green_eval_paths_agree() {
    let out = run(&["green-eval", "--t", "0,0.4", "--x", "0.2", "--y", "-0.4,0"]);
    assert!(out.status.success());
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let h = r.headers().unwrap().clone();
    assert_eq!(h.iter().collect::<Vec<_>>(), ["t", "x", "y", "spectral_re", "spectral_im", "parametrix_re", "parametrix_im", "abs_diff"]);
    let mut n = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let d: f64 = rec[7].parse().unwrap();
        let s = (rec[3].parse::<f64>().unwrap().powi(2) + rec[4].parse::<f64>().unwrap().powi(2)).sqrt();
        assert!(d <= 1e-8 * s.max(1e-12), "{rec:?}");
        n += 1;
    }
    assert_eq!(n, 4);
}

#[test]
fn envelope_dump_columns() {
    let dump = scratch("dump.csv");
    let out = run(&[
        "envelope-report", "--prop", "eq:2hh", "--n", "1", "--nt", "2", "--nx", "2", "--dy", "0.5", "--dump",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success() || out.status.code() == Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["prop_id", "params", "grid", "fitted_slope", "expected_slope", "ci", "max_ratio", "pass"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["prop_id"], "eq:2hh");
    let mut r = csv::Reader::from_path(&dump).unwrap();
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), ["N", "T", "X", "Y", "re", "im", "envelope_name", "envelope_value"]);
    assert!(r.records().count() > 0);
}

#[test]
fn local_maxima_interior_only() {
    let s = |t: f64, sup: f64| SupPoint { t, sup, x: 0.0, y: 0.0 };
    let scan = vec![s(0.0, 5.0), s(1.0, 1.0), s(2.0, 3.0), s(3.0, 2.0), s(4.0, 2.0), s(5.0, 4.0)];
    assert_eq!(local_maxima(&scan), vec![2.0]);
    let flat: Vec<SupPoint> = (0..5).map(|i| s(i as f64, 1.0)).collect();
    assert!(local_maxima(&flat).is_empty());
}

proptest! {
    #[test]
    fn floats_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
        let s = fmt_f64(v);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits());
    }
}
