use std::process::Command as Process;

use dqd_repeater::runner::{execute, parse_config, render, Command, OutputFormat, RunConfig, OUTPUT_DIR_ENV};
use dqd_repeater::Error;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_dqd-repeater");

fn config(args: &[&str]) -> RunConfig {
    parse_config(std::iter::once("dqd-repeater").chain(args.iter().copied())).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    csv::Reader::from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn chain_results_are_reproducible() {
    let cfg = config(&["chain", "--depth", "3", "--trials", "10000", "--seed", "7"]);
    let a = execute(&cfg).unwrap();
    let b = execute(&cfg).unwrap();
    assert_eq!(a.results_json().unwrap(), b.results_json().unwrap());
    let other = execute(&config(&["chain", "--depth", "3", "--trials", "10000", "--seed", "8"])).unwrap();
    assert_ne!(a.results_json().unwrap(), other.results_json().unwrap());
}

#[test]
fn enumerated_swap_json() {
    let rec = execute(&config(&["swap", "--enumerate"])).unwrap();
    let v: Value = serde_json::from_str(&render(&rec).unwrap()).unwrap();
    for key in ["config", "version", "results", "wall_time_ms"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["config"]["seed"], 0);
    assert_eq!(v["config"]["n_max"], 8);
    let swap = &v["results"]["swap"];
    let branches = swap["branches"].as_array().unwrap();
    assert_eq!(branches.len(), 4);
    for b in branches {
        assert!((b["probability"].as_f64().unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(b["post_state_amplitudes"].as_array().unwrap().len(), 4);
    }
    let tags: Vec<_> = branches.iter().map(|b| b["tag"].as_str().unwrap()).collect();
    assert_eq!(tags, ["Other", "PsiPrime", "Psi", "Other"]);
    assert!((swap["success_probability"].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn csv_matches_json() {
    let mut cfg = config(&["swap", "--enumerate"]);
    let json: Value = serde_json::from_str(&render(&execute(&cfg).unwrap()).unwrap()).unwrap();
    cfg.format = OutputFormat::Csv;
    let rows = csv_rows(&render(&execute(&cfg).unwrap()).unwrap());
    let branches = json["results"]["swap"]["branches"].as_array().unwrap();
    assert_eq!(rows.len(), branches.len());
    for (row, b) in rows.iter().zip(branches) {
        assert_eq!(row[0], b["outcome"].as_str().unwrap());
        assert!(rel(row[1].parse().unwrap(), b["probability"].as_f64().unwrap()) < 1e-14);
        let amps = b["post_state_amplitudes"].as_array().unwrap();
        for (k, pair) in amps.iter().enumerate() {
            for part in 0..2 {
                let j = pair[part].as_f64().unwrap();
                let c: f64 = row[4 + 2 * k + part].parse().unwrap();
                assert!((c - j).abs() <= 1e-14 * j.abs().max(1e-300), "{c} vs {j}");
            }
        }
    }

    let mut cfg = config(&["sweep", "--ratios", "20,40"]);
    let json: Value = serde_json::from_str(&render(&execute(&cfg).unwrap()).unwrap()).unwrap();
    cfg.format = OutputFormat::Csv;
    let rows = csv_rows(&render(&execute(&cfg).unwrap()).unwrap());
    let points = json["results"]["sweep"]["points"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for (row, p) in rows.iter().zip(points) {
        let inf = p["conditional_infidelity"].as_f64().unwrap();
        assert!(rel(row[5].parse().unwrap(), inf) < 1e-14);
        for k in 0..4 {
            let want = p["branch_probabilities"][k].as_f64().unwrap();
            assert!(rel(row[1 + k].parse().unwrap(), want) < 1e-14);
        }
    }
}

#[test]
fn config_file_layering() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "command = chain\ndepth = 2\ntrials = 50\nseed = 3\nformat = csv\n").unwrap();
    let p = path.to_str().unwrap();
    let cfg = config(&["--config", p, "--seed", "11"]);
    assert_eq!(cfg.command, Command::Chain);
    assert_eq!((cfg.depth, cfg.trials, cfg.seed), (2, 50, 11));
    assert_eq!(cfg.format, OutputFormat::Csv);
    let cfg = config(&["swap", "--config", p]);
    assert_eq!(cfg.command, Command::Swap);

    std::fs::write(&path, "trials = 5\nthreads = 4\n").unwrap();
    let err = parse_config(["dqd-repeater", "--config", p]).unwrap_err();
    assert!(matches!(err, Error::Config { ref key, .. } if key == "threads"), "{err}");
}

#[test]
fn cli_exit_codes() {
    let status = |args: &[&str]| Process::new(BIN).args(args).output().unwrap();
    let out = status(&["validate", "--n-max", "0"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n_max"));
    assert_eq!(status(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(status(&["--help"]).status.code(), Some(0));
    let out = status(&["closure", "--depth", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &v["results"]["closure"];
    assert_eq!(report["closed"], true);
    for level in report["levels"].as_array().unwrap() {
        for row in level["rows"].as_array().unwrap() {
            if row["success"] == true {
                let tag = row["output_tag"].as_str().unwrap();
                assert!(tag == "Psi" || tag == "PsiPrime");
            }
        }
    }
    let blocker = tempfile::NamedTempFile::new().unwrap();
    let bad = blocker.path().join("out.json");
    let out = status(&["swap", "--enumerate", "--output", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str]| {
        Process::new(BIN).args(args).env(OUTPUT_DIR_ENV, dir.path()).output().unwrap()
    };
    let out = run(&["swap", "--enumerate", "--format", "csv"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.path().join("swap.csv")).unwrap();
    assert!(text.starts_with("outcome,probability,success,tag,ee_re"));
    let out = run(&["sweep", "--ratios", "40", "--output", "nested/sweep.json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("nested/sweep.json")).unwrap()).unwrap();
    assert_eq!(v["results"]["sweep"]["points"].as_array().unwrap().len(), 1);
}
