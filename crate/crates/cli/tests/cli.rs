//! End-to-end tests of the CLI dispatch layer through `carpetdim_cli::run`.

use serde_json::Value;
use std::fs;
use tempfile::TempDir;

fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn write_pattern(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path.display().to_string()
}

fn full2(dir: &TempDir) -> String {
    write_pattern(dir, "full2.json", r#"{"base": 2, "cells": [[0,0],[0,1],[1,0],[1,1]]}"#)
}

fn corner(dir: &TempDir) -> String {
    write_pattern(dir, "corner.json", r#"{"base": 2, "cells": [[0,0],[1,0],[0,1]]}"#)
}

fn strip_timestamp(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"timestamp\""))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn equal_rates_full_square() {
    let dir = TempDir::new().unwrap();
    let p = full2(&dir);
    let (code, out) = carpetdim_cli::run(&args(&[
        "random-cover-dim",
        "--pattern",
        &p,
        "--tau1",
        "1",
        "--tau2",
        "1",
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["dimension"], 1.0);
    assert_eq!(v["case"], "equal-rates");
    assert!(v["config_hash"].as_str().unwrap().len() == 64);
    assert!(v["version"].is_string());
    assert!(v.get("seed").is_some());
}

#[test]
fn oracle_flag_reports_gap() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    let (code, out) = carpetdim_cli::run(&args(&[
        "random-cover-dim",
        "--pattern",
        &p,
        "--tau1",
        "0.8",
        "--tau2",
        "1.6",
        "--oracle",
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["oracle_gap"].as_f64().unwrap() < 1e-6);
}

#[test]
fn sweep_dimensions_non_increasing() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    let (code, out) =
        carpetdim_cli::run(&args(&["sweep", "--pattern", &p, "--tau1", "0.7:2:50"]));
    assert_eq!(code, 0);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(rows.len(), 50);
    let dims: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for w in dims.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "sweep not non-increasing: {w:?}");
    }
}

#[test]
fn spectrum_writes_both_csvs() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    let out_q = dir.path().join("q.csv");
    let out_a = dir.path().join("a.csv");
    let (code, out) = carpetdim_cli::run(&args(&[
        "spectrum",
        "--pattern",
        &p,
        "--out-q",
        out_q.to_str().unwrap(),
        "--out-alpha",
        out_a.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let third: f64 = 1.0 / 3.0;
    let entropy = -(2.0 * third * (2.0f64 / 3.0).log2() + third * third.log2());
    assert!((v["entropy_dimension"].as_f64().unwrap() - entropy).abs() < 1e-12);
    let q_text = fs::read_to_string(out_q).unwrap();
    assert!(q_text.starts_with("q,T,kappa,theta\n"));
    assert_eq!(q_text.lines().count(), 82);
    let a_text = fs::read_to_string(out_a).unwrap();
    assert!(a_text.starts_with("alpha,D_alpha\n"));
    assert_eq!(a_text.lines().count(), 102);
}

#[test]
fn content_rectangle_and_stripe() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    let (code, out) = carpetdim_cli::run(&args(&[
        "content", "--pattern", &p, "--s", "0.9", "--ydigits", "0110", "--oracle",
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    let formula = v["formula"].as_f64().unwrap();
    let oracle = v["oracle"].as_f64().unwrap();
    let n = 4.0;
    assert!(formula / (n + 1.0) <= oracle && oracle <= formula);

    let (code, out) = carpetdim_cli::run(&args(&[
        "content", "--pattern", &p, "--s", "0.9", "--ydigits", "0110", "--xdigits", "00",
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert!(v["formula"].as_f64().unwrap() > 0.0);
    assert!(v["oracle"].is_null());
}

#[test]
fn content_rejects_point_off_carpet() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    // (1,1) is not a cell of the corner pattern.
    let (code, out) = carpetdim_cli::run(&args(&[
        "content", "--pattern", &p, "--s", "0.9", "--ydigits", "11", "--xdigits", "11",
    ]));
    assert_eq!(code, 3);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"]["code"], "DomainError");
}

#[test]
fn general_rate_dim_reads_csv() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    let rates = dir.path().join("rates.csv");
    fs::write(&rates, "n,a_n,c_n\n1,1.2,1.9\n2,1.2,1.9\n3,1.2,1.9\n").unwrap();
    let (code, out) = carpetdim_cli::run(&args(&[
        "general-rate-dim",
        "--pattern",
        &p,
        "--rates",
        rates.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();

    // Constant sequences match the shrinking-target value.
    let (code, out) = carpetdim_cli::run(&args(&[
        "target-dim", "--pattern", &p, "--tau1", "1.2", "--tau2", "1.9",
    ]));
    assert_eq!(code, 0);
    let t: Value = serde_json::from_str(&out).unwrap();
    let gap = (v["dimension"].as_f64().unwrap() - t["dimension"].as_f64().unwrap()).abs();
    assert!(gap < 1e-12, "gap {gap}");
}

#[test]
fn general_rate_dim_rejects_bad_header() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    let rates = dir.path().join("rates.csv");
    fs::write(&rates, "n,psi,theta\n1,1.2,1.9\n").unwrap();
    let (code, out) = carpetdim_cli::run(&args(&[
        "general-rate-dim",
        "--pattern",
        &p,
        "--rates",
        rates.to_str().unwrap(),
    ]));
    assert_eq!(code, 2);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["error"]["field"], "rates");
}

#[test]
fn freq_dim_uniform_matches_target_dim() {
    let dir = TempDir::new().unwrap();
    let p = full2(&dir);
    let (code, out) = carpetdim_cli::run(&args(&[
        "freq-dim", "--pattern", &p, "--tau1", "1.5", "--tau2", "1.5",
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    // Uniform weights on the full square: dim mu = s0 = 2, so s0 / tau.
    assert!((v["dimension"].as_f64().unwrap() - 2.0 / 1.5).abs() < 1e-12);
}

#[test]
fn estimate_json_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let p = full2(&dir);
    let run_once = || {
        let (code, out) = carpetdim_cli::run(&args(&[
            "estimate", "--pattern", &p, "--tau1", "1", "--tau2", "1", "--mode", "iid", "--N",
            "4096", "--seed", "11",
        ]));
        assert_eq!(code, 0);
        out
    };
    let a = run_once();
    let b = run_once();
    assert_eq!(strip_timestamp(&a), strip_timestamp(&b));
    let v: Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["seed"], 11);
    assert!((v["s_star"].as_f64().unwrap() - 1.0).abs() < 0.2);
}

#[test]
fn estimate_emits_blocks_csv() {
    let dir = TempDir::new().unwrap();
    let p = full2(&dir);
    let blocks = dir.path().join("blocks.csv");
    let (code, out) = carpetdim_cli::run(&args(&[
        "estimate",
        "--pattern",
        &p,
        "--tau1",
        "1",
        "--tau2",
        "1",
        "--mode",
        "orbit",
        "--N",
        "4096",
        "--seed",
        "3",
        "--emit-blocks",
        blocks.to_str().unwrap(),
    ]));
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(
        v["blocks_csv_path"].as_str().unwrap(),
        blocks.to_str().unwrap()
    );
    let text = fs::read_to_string(blocks).unwrap();
    assert!(text.starts_with("s,k,log2_block_sum\n"));
    assert!(text.lines().count() > 5);
}

#[test]
fn config_hash_tracks_config() {
    let dir = TempDir::new().unwrap();
    let p = corner(&dir);
    let hash_of = |tau2: &str| {
        let (code, out) = carpetdim_cli::run(&args(&[
            "random-cover-dim", "--pattern", &p, "--tau1", "1", "--tau2", tau2,
        ]));
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        v["config_hash"].as_str().unwrap().to_string()
    };
    assert_eq!(hash_of("2"), hash_of("2"));
    assert_ne!(hash_of("2"), hash_of("3"));
}
