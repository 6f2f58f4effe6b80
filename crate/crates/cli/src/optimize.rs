use std::fmt::Write as _;
use std::fs;

use anyhow::Context;
use rayon::prelude::*;
use wpcf_core::maxmin::{fpc_baseline, solve_maxmin, MaxMinResult, SolverOptions};
use wpcf_core::{setup_seed, ScenarioConfig, SetupModel};

use crate::args::OptimizeArgs;
use crate::manifest::{RunManifest, SchemeRecord, SetupRecord, FPC, MMF};
use crate::{load_config, CliError, CliResult};

fn record(scheme: &str, r: &MaxMinResult) -> SchemeRecord {
    SchemeRecord {
        scheme: scheme.to_string(),
        status: r.status,
        t_star: r.t_star,
        min_se: r.min_se(),
        per_ue_se: r.per_ue_se.clone(),
        iterations: r.iterations,
    }
}

/// Solves both schemes on setup `setup_id` of the sweep rooted at `seed`.
pub fn run_setup(
    cfg: &ScenarioConfig,
    seed: u64,
    setup_id: usize,
    opts: &SolverOptions,
) -> anyhow::Result<SetupRecord> {
    let s = setup_seed(seed, setup_id);
    let model = SetupModel::draw(cfg, s).with_context(|| format!("setup {setup_id}"))?;
    let mmf = solve_maxmin(&model, cfg, opts)
        .with_context(|| format!("setup {setup_id}: max-min solver"))?;
    let fpc =
        fpc_baseline(&model, cfg).with_context(|| format!("setup {setup_id}: FPC baseline"))?;
    Ok(SetupRecord {
        setup_id,
        setup_seed: s,
        schemes: vec![record(MMF, &mmf), record(FPC, &fpc)],
    })
}

pub fn se_per_ue_csv(records: &[SetupRecord]) -> String {
    let mut out = String::from("setup_id,ue_id,scheme,se_bits_per_hz\n");
    for r in records {
        for s in &r.schemes {
            for (k, se) in s.per_ue_se.iter().enumerate() {
                writeln!(out, "{},{},{},{}", r.setup_id, k, s.scheme, se).unwrap();
            }
        }
    }
    out
}

pub fn min_se_csv(records: &[SetupRecord]) -> String {
    let mut out = String::from("setup_id,scheme,min_se\n");
    for r in records {
        for s in &r.schemes {
            writeln!(out, "{},{},{}", r.setup_id, s.scheme, s.min_se).unwrap();
        }
    }
    out
}

pub fn run_optimize(args: &OptimizeArgs) -> CliResult<RunManifest> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.epsilon.is_nan() || args.epsilon <= 0.0 {
        return Err(CliError::Usage(anyhow::anyhow!(
            "--epsilon must be positive"
        )));
    }
    let opts = SolverOptions {
        epsilon: args.epsilon,
        ..Default::default()
    };
    let records = (0..args.setups)
        .into_par_iter()
        .map(|i| run_setup(&cfg, cfg.seed, i, &opts))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(CliError::Failure)?;

    let manifest = RunManifest {
        config_path: args.config.as_ref().map(|p| p.display().to_string()),
        subcommand: "optimize".into(),
        setups: args.setups,
        out_dir: args.out.display().to_string(),
        seed: cfg.seed,
        config: cfg,
        records,
    };
    write_outputs(&manifest, args).map_err(CliError::Failure)?;
    Ok(manifest)
}

fn write_outputs(manifest: &RunManifest, args: &OptimizeArgs) -> anyhow::Result<()> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let write = |name: &str, body: String| {
        let path = args.out.join(name);
        fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    };
    write("se_per_ue.csv", se_per_ue_csv(&manifest.records))?;
    write("min_se_per_setup.csv", min_se_csv(&manifest.records))?;
    write(
        "manifest.json",
        serde_json::to_string_pretty(manifest)? + "\n",
    )?;
    Ok(())
}
