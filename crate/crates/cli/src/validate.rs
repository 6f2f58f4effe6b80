use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, Context};
use num_complex::Complex64;
use wpcf_core::maxmin::fpc_baseline;
use wpcf_core::wit::se_statistics_oracle;
use wpcf_core::wpt::harvested_energy_oracle_all;
use wpcf_core::{rng, ScenarioConfig, SetupModel};

use crate::args::{Fault, ValidateArgs};
use crate::{load_config, CliError, CliResult};

/// Largest `L·N·K` accepted, so the Monte Carlo pass stays in the minutes range.
pub const MAX_LNK: usize = 256;
pub const Z_LIMIT: f64 = 3.0;

/// Small instance with pilot sharing, used when no config is given.
pub fn default_validation_config() -> ScenarioConfig {
    ScenarioConfig {
        num_aps: 2,
        num_ues: 4,
        antennas: 2,
        tau_p: 2,
        tau_u: 173,
        ..Default::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub quantity: &'static str,
    pub index: String,
    pub closed: Complex64,
    pub estimate: Complex64,
    /// Largest |z| over the real and imaginary parts.
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn max_abs_z(&self) -> f64 {
        self.checks.iter().map(|c| c.z).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.z <= Z_LIMIT)
    }

    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("quantity,index,closed_re,closed_im,estimate_re,estimate_im,abs_z\n");
        for c in &self.checks {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                c.quantity, c.index, c.closed.re, c.closed.im, c.estimate.re, c.estimate.im, c.z
            )
            .unwrap();
        }
        out
    }
}

/// Closed forms of one setup against their Monte Carlo estimates.
///
/// Energy is checked under the FPC allocation. `fault` inflates one closed-form
/// term before comparison.
pub fn validate_model(
    model: &SetupModel,
    cfg: &ScenarioConfig,
    mc_samples: usize,
    seed: u64,
    fault: Option<Fault>,
) -> anyhow::Result<ValidationReport> {
    let (kk, ll) = (model.num_ues(), model.num_aps());
    let alloc = fpc_baseline(model, cfg)?.allocation;
    let energy_bias = if fault == Some(Fault::Energy) {
        1.05
    } else {
        1.0
    };
    let gain_bias = if fault == Some(Fault::Gain) {
        1.05
    } else {
        1.0
    };
    let mut checks = Vec::new();

    let energy = harvested_energy_oracle_all(
        &alloc,
        &model.cache,
        &model.stats,
        &model.plan,
        cfg,
        mc_samples,
        rng::child_seed(seed, 0),
    );
    for (k, est) in energy.iter().enumerate() {
        let closed = model.harvest.energy(k, &alloc) * energy_bias;
        checks.push(Check {
            quantity: "E",
            index: format!("k={k}"),
            closed: closed.into(),
            estimate: est.mean.into(),
            z: est.z_score(closed).abs(),
        });
    }

    let oracle = se_statistics_oracle(
        &model.cache,
        &model.stats,
        &model.plan,
        cfg,
        mc_samples,
        rng::child_seed(seed, 1),
    );
    let se = &model.se;
    for k in 0..kk {
        for l in 0..ll {
            let closed = Complex64::new(se.b[k][l] * gain_bias, 0.0);
            let est = oracle.b[k][l];
            checks.push(Check {
                quantity: "b",
                index: format!("k={k} l={l}"),
                closed,
                estimate: est.mean(),
                z: est.max_abs_z(closed),
            });
            let est = oracle.d[k][l];
            checks.push(Check {
                quantity: "D",
                index: format!("k={k} l={l}"),
                closed: se.d[k][l].into(),
                estimate: est.mean.into(),
                z: est.z_score(se.d[k][l]).abs(),
            });
        }
        for kp in 0..kk {
            for l in 0..ll {
                for lp in 0..ll {
                    let closed = se.c(k, kp)[(l, lp)];
                    let est = oracle.c(k, kp, l, lp);
                    checks.push(Check {
                        quantity: "C",
                        index: format!("k={k} k'={kp} l={l} l'={lp}"),
                        closed,
                        estimate: est.mean(),
                        z: est.max_abs_z(closed),
                    });
                }
            }
        }
    }
    Ok(ValidationReport { checks })
}

pub fn run_validate(args: &ValidateArgs) -> CliResult<ValidationReport> {
    let mut cfg = match &args.config {
        Some(_) => load_config(args.config.as_deref())?,
        None => default_validation_config(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let lnk = cfg.num_aps * cfg.antennas * cfg.num_ues;
    if lnk > MAX_LNK {
        return Err(CliError::Usage(anyhow!(
            "validation instance too large: L·N·K = {lnk} exceeds {MAX_LNK}"
        )));
    }
    let samples = args.mc_samples.unwrap_or(cfg.mc_samples);
    if samples < 1000 {
        return Err(CliError::Usage(anyhow!(
            "--mc-samples must be at least 1000"
        )));
    }
    let model = SetupModel::draw(&cfg, cfg.seed).map_err(|e| CliError::Failure(e.into()))?;
    let report = validate_model(&model, &cfg, samples, cfg.seed, args.inject_fault)
        .map_err(CliError::Failure)?;
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)
            .and_then(|_| fs::write(dir.join("validation.csv"), report.to_csv()))
            .with_context(|| format!("writing report to {}", dir.display()))
            .map_err(CliError::Failure)?;
    }
    Ok(report)
}
