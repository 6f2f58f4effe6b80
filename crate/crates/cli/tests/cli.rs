use std::fs;
use std::path::Path;
use std::process::Command;

use proptest::prelude::*;
use wpcf_cli::args::{CdfArgs, Fault, OptimizeArgs, ValidateArgs};
use wpcf_cli::cdf::{cdf_csv, likely_value, run_cdf};
use wpcf_cli::manifest::RunManifest;
use wpcf_cli::optimize::run_optimize;
use wpcf_cli::validate::run_validate;

const SMALL: &str = "L = 4\nK = 4\nN = 2\ntau_p = 2\ntau_u = 173\n";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wpcf"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("scenario.toml");
    fs::write(&p, body).unwrap();
    p
}

fn optimize_args(config: &Path, out: &Path, setups: usize) -> OptimizeArgs {
    OptimizeArgs {
        config: Some(config.to_path_buf()),
        setups,
        seed: Some(11),
        out: out.to_path_buf(),
        epsilon: 1e-2,
    }
}

#[test]
fn optimize_writes_one_row_per_setup_ue_and_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let m = run_optimize(&optimize_args(&cfg, &out, 2)).unwrap();
    assert_eq!(m.records.len(), 2);
    let se = fs::read_to_string(out.join("se_per_ue.csv")).unwrap();
    let lines: Vec<&str> = se.lines().collect();
    assert_eq!(lines[0], "setup_id,ue_id,scheme,se_bits_per_hz");
    assert_eq!(lines.len(), 1 + 2 * 4 * 2);
    let min = fs::read_to_string(out.join("min_se_per_setup.csv")).unwrap();
    assert_eq!(min.lines().next().unwrap(), "setup_id,scheme,min_se");
    assert_eq!(min.lines().count(), 1 + 2 * 2);
    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest, m);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let status = bin()
            .args(["optimize", "--setups", "6", "--seed", "3", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for f in ["se_per_ue.csv", "min_se_per_setup.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn setups_are_individually_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let all = run_optimize(&optimize_args(&cfg, &dir.path().join("a"), 4)).unwrap();
    let parsed = wpcf_core::ScenarioConfig::from_file(&cfg).unwrap();
    let cfg11 = wpcf_core::ScenarioConfig { seed: 11, ..parsed };
    let third = wpcf_cli::optimize::run_setup(&cfg11, 11, 3, &Default::default()).unwrap();
    assert_eq!(all.records[3], third);
}

#[test]
fn default_scenario_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "L = 16\nN = 25\nK = 20\nrho_d = 0.25\n");
    let parsed = wpcf_core::ScenarioConfig::from_file(&cfg).unwrap();
    assert_eq!(parsed, wpcf_core::ScenarioConfig::default());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "L = 4\nbogus = 1\n");
    let out = dir.path().join("o");
    let code = |args: &[&str]| bin().args(args).status().unwrap().code().unwrap();
    assert_eq!(
        code(&[
            "optimize",
            "--config",
            bad.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ]),
        2
    );
    assert_eq!(code(&["optimize", "--no-such-flag"]), 2);
    assert_eq!(
        code(&["cdf", "--out", dir.path().join("missing").to_str().unwrap()]),
        2
    );
}

#[test]
fn validation_passes_and_detects_corruption() {
    let args = ValidateArgs {
        config: None,
        seed: None,
        mc_samples: Some(100_000),
        out: None,
        inject_fault: None,
    };
    let report = run_validate(&args).unwrap();
    // 84 checks at a 3σ gate: an occasional excursion is expected, a bias is not
    let over = report.checks.iter().filter(|c| c.z.abs() > 3.0).count();
    assert!(over <= 2, "{over} checks beyond 3σ");
    assert!(report.max_abs_z() < 5.0, "max |z| = {}", report.max_abs_z());
    for fault in [Fault::Energy, Fault::Gain] {
        let report = run_validate(&ValidateArgs {
            inject_fault: Some(fault),
            ..args.clone()
        })
        .unwrap();
        assert!(!report.passed(), "{fault:?} went unnoticed");
    }
}

#[test]
fn validation_binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mu0 = write_config(dir.path(), "L = 2\nK = 2\nN = 2\nmu = 0.0\n");
    let run = |extra: &[&str]| {
        bin()
            .args([
                "validate",
                "--mc-samples",
                "20000",
                "--config",
                mu0.to_str().unwrap(),
            ])
            .args(extra)
            .status()
            .unwrap()
            .code()
            .unwrap()
    };
    assert_eq!(run(&[]), 0);
    let big = dir.path().join("big.toml");
    fs::write(&big, "L = 16\nK = 20\nN = 25\n").unwrap();
    let code = bin()
        .args(["validate", "--config", big.to_str().unwrap()])
        .status()
        .unwrap()
        .code()
        .unwrap();
    assert_eq!(code, 2);
}

#[test]
fn zero_efficiency_harvests_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "L = 2\nK = 2\nN = 2\nmu = 0.0\n");
    let report = run_validate(&ValidateArgs {
        config: Some(cfg),
        seed: None,
        mc_samples: Some(5000),
        out: None,
        inject_fault: None,
    })
    .unwrap();
    for c in report.checks.iter().filter(|c| c.quantity == "E") {
        assert_eq!(c.closed.re, 0.0);
        assert_eq!(c.estimate.re, 0.0);
    }
}

#[test]
fn cdf_of_a_single_value() {
    assert_eq!(cdf_csv(&[0.7]), "value,probability\n0.7,1\n");
    assert_eq!(likely_value(&[0.7], 0.1), Some(0.7));
    assert_eq!(likely_value(&[], 0.1), None);
}

#[test]
fn likely_se_is_the_ceil_rank_sample() {
    let v: Vec<f64> = (1..=25).rev().map(f64::from).collect();
    // ⌈0.1·25⌉ = 3, ⌈0.05·25⌉ = 2
    assert_eq!(likely_value(&v, 0.10), Some(3.0));
    assert_eq!(likely_value(&v, 0.05), Some(2.0));
}

#[test]
fn cdf_subcommand_reads_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    run_optimize(&optimize_args(&cfg, &out, 3)).unwrap();
    let rows = run_cdf(&CdfArgs {
        manifest: None,
        out: out.clone(),
    })
    .unwrap();
    assert_eq!(rows.len(), 4);
    let body = fs::read_to_string(out.join("cdf_min_se_mmf.csv")).unwrap();
    let probs: Vec<f64> = body
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(probs.len(), 3);
    assert_eq!(*probs.last().unwrap(), 1.0);
    assert!(out.join("cdf_summary.csv").exists());
}

#[test]
fn empty_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    run_optimize(&optimize_args(&cfg, &out, 0)).unwrap();
    let err = run_cdf(&CdfArgs {
        manifest: None,
        out: out.clone(),
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn csv_outputs_parse_back(setups in 1usize..4, seed in any::<u64>()) {
        let dir = tempfile::tempdir().unwrap();
        let cfg = write_config(dir.path(), SMALL);
        let out = dir.path().join("run");
        let m = run_optimize(&OptimizeArgs { seed: Some(seed), ..optimize_args(&cfg, &out, setups) }).unwrap();
        let se = fs::read_to_string(out.join("se_per_ue.csv")).unwrap();
        let mut rows = se.lines().skip(1).map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse::<usize>().unwrap(), f[1].parse::<usize>().unwrap(), f[2].to_string(), f[3].parse::<f64>().unwrap())
        });
        for r in &m.records {
            for s in &r.schemes {
                for (k, v) in s.per_ue_se.iter().enumerate() {
                    prop_assert_eq!(rows.next().unwrap(), (r.setup_id, k, s.scheme.clone(), *v));
                }
            }
        }
        prop_assert!(rows.next().is_none());
        let min = fs::read_to_string(out.join("min_se_per_setup.csv")).unwrap();
        for (line, (r, s)) in min.lines().skip(1).zip(m.records.iter().flat_map(|r| r.schemes.iter().map(move |s| (r, s)))) {
            let f: Vec<&str> = line.split(',').collect();
            prop_assert_eq!(f[0].parse::<usize>().unwrap(), r.setup_id);
            prop_assert_eq!(f[1], s.scheme.as_str());
            prop_assert_eq!(f[2].parse::<f64>().unwrap(), s.min_se);
        }
    }
}
