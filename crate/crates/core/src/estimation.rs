//! Phase-unaware LMMSE channel estimation and the long-term matrices built on it.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::PilotObservation;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::ChannelStatistics;
use crate::linalg::{trace_product, CVector, ComplexMatrix, HermitianCholesky};

/// Smallest NLOS variance admitted into `R_kl`.
pub const BETA_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotPlan {
    pilot_of: Vec<usize>,
    num_pilots: usize,
}

impl PilotPlan {
    /// Explicit assignment; `pilot_of[k]` must lie below `num_pilots`.
    pub fn new(pilot_of: Vec<usize>, num_pilots: usize) -> Result<Self> {
        if let Some(bad) = pilot_of.iter().find(|&&p| p >= num_pilots) {
            return Err(Error::Invalid(format!(
                "pilot index {bad} out of range 0..{num_pilots}"
            )));
        }
        Ok(Self {
            pilot_of,
            num_pilots,
        })
    }

    pub fn pilot_of(&self, k: usize) -> usize {
        self.pilot_of[k]
    }

    pub fn num_pilots(&self) -> usize {
        self.num_pilots
    }

    pub fn num_ues(&self) -> usize {
        self.pilot_of.len()
    }

    pub fn shares_pilot(&self, k: usize, i: usize) -> bool {
        self.pilot_of[k] == self.pilot_of[i]
    }

    /// `P_k`, including `k` itself.
    pub fn group(&self, k: usize) -> Vec<usize> {
        let p = self.pilot_of[k];
        (0..self.pilot_of.len())
            .filter(|&i| self.pilot_of[i] == p)
            .collect()
    }

    pub fn pilots_in_use(&self) -> BTreeSet<usize> {
        self.pilot_of.iter().copied().collect()
    }
}

/// Round-robin: UE `k` gets pilot `k mod τ_p`.
pub fn assign_pilots(cfg: &ScenarioConfig) -> PilotPlan {
    PilotPlan {
        pilot_of: (0..cfg.num_ues).map(|k| k % cfg.tau_p).collect(),
        num_pilots: cfg.tau_p,
    }
}

/// Per-link estimation quantities.
#[derive(Debug, Clone)]
pub struct LinkEstimate {
    /// `R_kl = ḡḡᴴ + βI`.
    pub r: ComplexMatrix,
    /// `R̂_kl`.
    pub r_hat: ComplexMatrix,
    /// Error covariance `C_kl = R_kl − R̂_kl`.
    pub err_cov: ComplexMatrix,
    /// `Ψ_kl⁻¹ R_kl`.
    pub psi_inv_r: ComplexMatrix,
    /// `√(ρ_pτ_p) R_kl Ψ_kl⁻¹`, maps `z_kl` to `ĝ_kl`.
    pub estimator: ComplexMatrix,
    pub tr_r_hat: f64,
    /// `tr(Ψ_kl⁻¹ R_kl)`, real and positive.
    pub tr_psi_inv_r: f64,
    /// Effective NLOS variance after flooring.
    pub beta: f64,
}

/// `Ψ` and its inverse for one (pilot, AP) pair; shared by every UE on the pilot.
#[derive(Debug, Clone)]
pub struct PilotCovariance {
    pub psi: ComplexMatrix,
    pub psi_inv: ComplexMatrix,
}

#[derive(Debug, Clone)]
pub struct EstimationCache {
    pub num_aps: usize,
    pub num_ues: usize,
    pub antennas: usize,
    plan: PilotPlan,
    links: Vec<LinkEstimate>,
    pilot_cov: Vec<Option<PilotCovariance>>,
}

impl EstimationCache {
    pub fn link(&self, k: usize, l: usize) -> &LinkEstimate {
        &self.links[k * self.num_aps + l]
    }

    pub fn plan(&self) -> &PilotPlan {
        &self.plan
    }

    fn pilot_cov(&self, pilot: usize, l: usize) -> &PilotCovariance {
        self.pilot_cov[pilot * self.num_aps + l]
            .as_ref()
            .expect("pilot covariance exists for every pilot in use")
    }

    pub fn psi(&self, k: usize, l: usize) -> &ComplexMatrix {
        &self.pilot_cov(self.plan.pilot_of(k), l).psi
    }

    pub fn psi_inv(&self, k: usize, l: usize) -> &ComplexMatrix {
        &self.pilot_cov(self.plan.pilot_of(k), l).psi_inv
    }

    pub fn tr_r_hat(&self, k: usize, l: usize) -> f64 {
        self.link(k, l).tr_r_hat
    }
}

fn channel_covariance(beta: f64, los_mean: &[Complex64]) -> ComplexMatrix {
    let mut r = ComplexMatrix::outer(los_mean, los_mean);
    r.add_to_diagonal(beta);
    r
}

/// Builds `R`, `Ψ`, `Ψ⁻¹`, `R̂`, `C` and derived traces for every link.
pub fn build_cache(
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
) -> Result<EstimationCache> {
    let (l_count, k_count, n) = (stats.num_aps, stats.num_ues, stats.antennas);
    if plan.num_ues() != k_count {
        return Err(Error::Dimension(format!(
            "pilot plan covers {} UEs, statistics {}",
            plan.num_ues(),
            k_count
        )));
    }
    let gain = cfg.pilot_energy_gain();

    let betas: Vec<f64> = (0..k_count)
        .flat_map(|k| (0..l_count).map(move |l| (k, l)))
        .map(|(k, l)| stats.beta(k, l).max(BETA_FLOOR))
        .collect();
    let rs: Vec<ComplexMatrix> = (0..k_count)
        .flat_map(|k| (0..l_count).map(move |l| (k, l)))
        .map(|(k, l)| channel_covariance(betas[k * l_count + l], stats.los_mean(k, l)))
        .collect();

    let mut pilot_cov = vec![None; plan.num_pilots() * l_count];
    for pilot in plan.pilots_in_use() {
        for l in 0..l_count {
            let mut psi = ComplexMatrix::scaled_identity(n, cfg.sigma2);
            for i in (0..k_count).filter(|&i| plan.pilot_of(i) == pilot) {
                psi.add_scaled(&rs[i * l_count + l], gain);
            }
            let psi_inv = HermitianCholesky::factor(&psi)?.inverse();
            pilot_cov[pilot * l_count + l] = Some(PilotCovariance { psi, psi_inv });
        }
    }

    let mut links = Vec::with_capacity(k_count * l_count);
    for k in 0..k_count {
        for l in 0..l_count {
            let r = rs[k * l_count + l].clone();
            let pc = pilot_cov[plan.pilot_of(k) * l_count + l].as_ref().unwrap();
            let psi_inv_r = &pc.psi_inv * &r;
            let r_psi_inv = &r * &pc.psi_inv;
            let r_hat = (&r * &psi_inv_r).scale(gain).hermitian_part();
            let err_cov = &r - &r_hat;
            let tr_r_hat = r_hat.trace().re;
            let tr_psi_inv_r = psi_inv_r.trace().re;
            links.push(LinkEstimate {
                estimator: r_psi_inv.scale(gain.sqrt()),
                r,
                r_hat,
                err_cov,
                psi_inv_r,
                tr_r_hat,
                tr_psi_inv_r,
                beta: betas[k * l_count + l],
            });
        }
    }
    Ok(EstimationCache {
        num_aps: l_count,
        num_ues: k_count,
        antennas: n,
        plan: plan.clone(),
        links,
        pilot_cov,
    })
}

/// `ĝ_kl = √(ρ_pτ_p) R_kl Ψ_kl⁻¹ z_kl` for every link, indexed `[k*L + l]`.
pub fn lmmse_estimate(z: &PilotObservation, cache: &EstimationCache) -> Vec<CVector> {
    let mut out = Vec::with_capacity(cache.num_ues * cache.num_aps);
    for k in 0..cache.num_ues {
        for l in 0..cache.num_aps {
            out.push(cache.link(k, l).estimator.mul_vec(z.get(k, l)));
        }
    }
    out
}

/// `tr(R̂_il R_kl)`, real part.
pub fn tr_rhat_r(cache: &EstimationCache, i: usize, k: usize, l: usize) -> f64 {
    trace_product(&cache.link(i, l).r_hat, &cache.link(k, l).r)
        .expect("square matrices of equal size")
        .re
}
