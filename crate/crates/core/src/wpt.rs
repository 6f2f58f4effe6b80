//! Downlink wireless power transfer with non-coherent MR precoding.
//!
//! Harvested energy is affine (zero constant) in the AP power coefficients, so
//! besides the value we expose its coefficient vector; the feasibility LP uses
//! that form directly.
//!
//! Energy is measured in W·samples (power times number of energy symbols).

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{sample_pilot_observation, sample_realization};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::estimation::{lmmse_estimate, tr_rhat_r, EstimationCache, PilotPlan};
use crate::geometry::ChannelStatistics;
use crate::linalg::dot;
use crate::montecarlo::{run_batched, Estimate, RealMean};

/// AP coefficients `p_kl` (stored `[k*L + l]`) and UE uplink powers `η_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub num_aps: usize,
    pub num_ues: usize,
    pub p: Vec<f64>,
    pub eta: Vec<f64>,
}

impl PowerAllocation {
    pub fn zeros(num_ues: usize, num_aps: usize) -> Self {
        Self {
            num_aps,
            num_ues,
            p: vec![0.0; num_ues * num_aps],
            eta: vec![0.0; num_ues],
        }
    }

    pub fn new(num_ues: usize, num_aps: usize, p: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if p.len() != num_ues * num_aps || eta.len() != num_ues {
            return Err(Error::Dimension(
                "allocation sizes do not match K and L".into(),
            ));
        }
        if p.iter().chain(&eta).any(|v| !(*v >= 0.0)) {
            return Err(Error::Invalid(
                "power coefficients must be non-negative".into(),
            ));
        }
        Ok(Self {
            num_aps,
            num_ues,
            p,
            eta,
        })
    }

    pub fn p(&self, k: usize, l: usize) -> f64 {
        self.p[k * self.num_aps + l]
    }

    pub fn set_p(&mut self, k: usize, l: usize, v: f64) {
        self.p[k * self.num_aps + l] = v;
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            p: self.p.iter().map(|v| v * alpha).collect(),
            eta: self.eta.iter().map(|v| v * alpha).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Average transmit power per AP (W).
    pub ap_power: Vec<f64>,
    /// Average harvested energy per UE (W·samples).
    pub harvested: Vec<f64>,
}

/// `P_l^E = Σ_k p_kl tr(R̂_kl)`.
pub fn ap_transmit_power(alloc: &PowerAllocation, l: usize, cache: &EstimationCache) -> f64 {
    (0..alloc.num_ues)
        .map(|k| alloc.p(k, l) * cache.tr_r_hat(k, l))
        .sum()
}

/// The three additive pieces of `E{|ĝ_ilᴴ g_kl|²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarvestTerms {
    /// `tr(R̂_il R_kl)`.
    pub estimate_power: f64,
    /// `ρ_p²τ_p²·2β_kl·Re{ḡ_klᴴΨ_il⁻¹R_ilḡ_kl}·tr(R_ilΨ_il⁻¹)`; zero unless `k ∈ P_i`.
    pub los_cross: f64,
    /// `ρ_p²τ_p²·β_kl²·tr(R_ilΨ_il⁻¹)²`; zero unless `k ∈ P_i`.
    pub nlos_fourth: f64,
}

impl HarvestTerms {
    pub fn total(&self) -> f64 {
        self.estimate_power + self.los_cross + self.nlos_fourth
    }
}

/// Pilot-contamination terms for the estimate of link `(i,l)` seen by the
/// channel of UE `k` on the same pilot.
///
/// Returns `(ḡ_klᴴΨ_il⁻¹R_ilḡ_kl, tr(Ψ_il⁻¹R_il))`.
pub(crate) fn contamination_factors(
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    i: usize,
    k: usize,
    l: usize,
) -> (Complex64, f64) {
    let est = cache.link(i, l);
    let g = stats.los_mean(k, l);
    (est.psi_inv_r.bilinear(g, g), est.tr_psi_inv_r)
}

pub fn harvest_terms(
    k: usize,
    i: usize,
    l: usize,
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
) -> HarvestTerms {
    let estimate_power = tr_rhat_r(cache, i, k, l);
    if !plan.shares_pilot(i, k) {
        return HarvestTerms {
            estimate_power,
            los_cross: 0.0,
            nlos_fourth: 0.0,
        };
    }
    let g2 = cfg.pilot_energy_gain().powi(2);
    let beta = cache.link(k, l).beta;
    let (quad, tr) = contamination_factors(cache, stats, i, k, l);
    HarvestTerms {
        estimate_power,
        los_cross: g2 * 2.0 * beta * quad.re * tr,
        nlos_fourth: g2 * beta * beta * tr * tr,
    }
}

/// Coefficients of the affine map `p ↦ E_k(p)` for every UE.
#[derive(Debug, Clone)]
pub struct HarvestCoefficients {
    pub num_aps: usize,
    pub num_ues: usize,
    /// `coef[k*(K*L) + i*L + l] = ∂E_k/∂p_il`.
    coef: Vec<f64>,
}

impl HarvestCoefficients {
    pub fn build(
        cache: &EstimationCache,
        stats: &ChannelStatistics,
        plan: &PilotPlan,
        cfg: &ScenarioConfig,
    ) -> Self {
        let (kk, ll) = (cache.num_ues, cache.num_aps);
        let scale = cfg.mu * cfg.tau_d as f64;
        let mut coef = Vec::with_capacity(kk * kk * ll);
        for k in 0..kk {
            for i in 0..kk {
                for l in 0..ll {
                    coef.push(scale * harvest_terms(k, i, l, cache, stats, plan, cfg).total());
                }
            }
        }
        Self {
            num_aps: ll,
            num_ues: kk,
            coef,
        }
    }

    /// `∂E_k/∂p`, laid out like [`PowerAllocation::p`].
    pub fn gradient(&self, k: usize) -> &[f64] {
        let n = self.num_ues * self.num_aps;
        &self.coef[k * n..(k + 1) * n]
    }

    pub fn energy(&self, k: usize, alloc: &PowerAllocation) -> f64 {
        self.gradient(k)
            .iter()
            .zip(&alloc.p)
            .map(|(c, p)| c * p)
            .sum()
    }

    pub fn energies(&self, alloc: &PowerAllocation) -> Vec<f64> {
        (0..self.num_ues).map(|k| self.energy(k, alloc)).collect()
    }
}

/// Closed-form average harvested energy `E_k`.
pub fn harvested_energy(
    k: usize,
    alloc: &PowerAllocation,
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
) -> f64 {
    let mut e = 0.0;
    for i in 0..alloc.num_ues {
        for l in 0..alloc.num_aps {
            let p = alloc.p(i, l);
            if p != 0.0 {
                e += p * harvest_terms(k, i, l, cache, stats, plan, cfg).total();
            }
        }
    }
    cfg.mu * cfg.tau_d as f64 * e
}

pub fn energy_report(
    alloc: &PowerAllocation,
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
) -> EnergyReport {
    EnergyReport {
        ap_power: (0..alloc.num_aps)
            .map(|l| ap_transmit_power(alloc, l, cache))
            .collect(),
        harvested: (0..alloc.num_ues)
            .map(|k| harvested_energy(k, alloc, cache, stats, plan, cfg))
            .collect(),
    }
}

/// Monte Carlo estimate of every UE's harvested energy.
///
/// Each sample draws fresh channels, pilot noise and unit-modulus energy
/// symbols, forms the LMMSE estimates and evaluates
/// `μτ_d |Σ_l Σ_i √p_il ĝ_ilᴴ g_kl s_il|²`. Harvester noise is ignored.
pub fn harvested_energy_oracle_all(
    alloc: &PowerAllocation,
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
    mc_samples: usize,
    seed: u64,
) -> Vec<Estimate> {
    let (kk, ll) = (alloc.num_ues, alloc.num_aps);
    let scale = cfg.mu * cfg.tau_d as f64;
    let amps: Vec<f64> = alloc.p.iter().map(|p| p.sqrt()).collect();
    let acc = run_batched(
        seed,
        mc_samples,
        || vec![RealMean::default(); kk],
        |acc, rng| {
            let real = sample_realization(stats, rng);
            let z = sample_pilot_observation(&real, stats, plan, cfg, rng);
            let g_hat = lmmse_estimate(&z, cache);
            let symbols: Vec<Complex64> = (0..kk * ll)
                .map(|_| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
                .collect();
            for (k, slot) in acc.iter_mut().enumerate() {
                let mut y = Complex64::new(0.0, 0.0);
                for i in 0..kk {
                    for l in 0..ll {
                        let idx = i * ll + l;
                        if amps[idx] != 0.0 {
                            y += dot(&g_hat[idx], real.get(k, l)) * symbols[idx] * amps[idx];
                        }
                    }
                }
                slot.push(scale * y.norm_sqr());
            }
        },
        |total, part| {
            for (t, p) in total.iter_mut().zip(&part) {
                t.merge(p);
            }
        },
    );
    acc.iter().map(RealMean::estimate).collect()
}

/// Monte Carlo estimate of `E_k` for one UE.
#[allow(clippy::too_many_arguments)]
pub fn harvested_energy_oracle(
    k: usize,
    alloc: &PowerAllocation,
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
    mc_samples: usize,
    seed: u64,
) -> Estimate {
    harvested_energy_oracle_all(alloc, cache, stats, plan, cfg, mc_samples, seed)[k]
}

/// Monte Carlo estimate of `E{‖x_l^E‖²}` for every AP.
pub fn ap_power_oracle(
    alloc: &PowerAllocation,
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
    mc_samples: usize,
    seed: u64,
) -> Vec<Estimate> {
    let (kk, ll) = (alloc.num_ues, alloc.num_aps);
    let n = cache.antennas;
    let acc = run_batched(
        seed,
        mc_samples,
        || vec![RealMean::default(); ll],
        |acc, rng| {
            let real = sample_realization(stats, rng);
            let z = sample_pilot_observation(&real, stats, plan, cfg, rng);
            let g_hat = lmmse_estimate(&z, cache);
            for (l, slot) in acc.iter_mut().enumerate() {
                let mut x = vec![Complex64::new(0.0, 0.0); n];
                for k in 0..kk {
                    let s = Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU);
                    let a = alloc.p(k, l).sqrt();
                    for (xv, g) in x.iter_mut().zip(&g_hat[k * ll + l]) {
                        *xv += g.conj() * s * a;
                    }
                }
                slot.push(crate::linalg::norm_sqr(&x));
            }
        },
        |total, part| {
            for (t, p) in total.iter_mut().zip(&part) {
                t.merge(p);
            }
        },
    );
    acc.iter().map(RealMean::estimate).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{assign_pilots, build_cache};
    use crate::geometry::{draw_link_statistics, place_network, PropagationModel};
    use crate::rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    struct Fixture {
        cfg: ScenarioConfig,
        stats: ChannelStatistics,
        plan: PilotPlan,
        cache: EstimationCache,
    }

    fn fixture() -> Fixture {
        let cfg = ScenarioConfig {
            num_aps: 2,
            num_ues: 3,
            antennas: 2,
            tau_p: 2,
            tau_d: 3,
            tau_u: 5,
            tau_c: 10,
            rho_p: 0.4,
            sigma2: 0.3,
            mu: 0.7,
            ..Default::default()
        };
        let stats = ChannelStatistics::from_links(vec![
            vec![
                (0.5, vec![c(0.8, 0.2), c(-0.3, 0.6)]),
                (0.2, vec![c(0.1, 0.0), c(0.0, 0.3)]),
            ],
            vec![
                (1.2, vec![c(0.0, 0.0), c(0.0, 0.0)]),
                (0.6, vec![c(0.5, -0.5), c(0.2, 0.2)]),
            ],
            vec![
                (0.3, vec![c(0.1, -0.9), c(0.4, 0.4)]),
                (0.9, vec![c(-0.7, 0.1), c(0.3, 0.0)]),
            ],
        ])
        .unwrap();
        let plan = assign_pilots(&cfg);
        let cache = build_cache(&stats, &plan, &cfg).unwrap();
        Fixture {
            cfg,
            stats,
            plan,
            cache,
        }
    }

    fn alloc() -> PowerAllocation {
        PowerAllocation::new(3, 2, vec![0.3, 1.1, 0.0, 0.5, 0.9, 0.2], vec![0.0; 3]).unwrap()
    }

    #[test]
    fn zero_allocation_means_no_power_or_energy() {
        let f = fixture();
        let a = PowerAllocation::zeros(3, 2);
        assert_eq!(ap_transmit_power(&a, 0, &f.cache), 0.0);
        for k in 0..3 {
            assert_eq!(
                harvested_energy(k, &a, &f.cache, &f.stats, &f.plan, &f.cfg),
                0.0
            );
        }
        let est = harvested_energy_oracle(0, &a, &f.cache, &f.stats, &f.plan, &f.cfg, 2000, 1);
        assert_eq!((est.mean, est.std_error), (0.0, 0.0));
    }

    #[test]
    fn single_ue_scalar_power() {
        let cfg = ScenarioConfig {
            num_aps: 1,
            num_ues: 1,
            antennas: 1,
            tau_p: 1,
            tau_d: 1,
            tau_u: 1,
            tau_c: 3,
            rho_p: 1.0,
            sigma2: 1.0,
            ..Default::default()
        };
        let stats = ChannelStatistics::from_links(vec![vec![(1.0, vec![c(1.0, 0.0)])]]).unwrap();
        let cache = build_cache(&stats, &assign_pilots(&cfg), &cfg).unwrap();
        let a = PowerAllocation::new(1, 1, vec![0.5], vec![0.0]).unwrap();
        assert!((ap_transmit_power(&a, 0, &cache) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn linear_in_allocation_and_tau_d() {
        let f = fixture();
        let a = alloc();
        let b =
            PowerAllocation::new(3, 2, vec![0.1, 0.0, 0.7, 0.2, 0.0, 1.3], vec![0.0; 3]).unwrap();
        let sum = PowerAllocation::new(
            3,
            2,
            a.p.iter().zip(&b.p).map(|(x, y)| x + y).collect(),
            vec![0.0; 3],
        )
        .unwrap();
        let coefs = HarvestCoefficients::build(&f.cache, &f.stats, &f.plan, &f.cfg);
        let mut cfg2 = f.cfg.clone();
        cfg2.tau_d *= 2;
        cfg2.tau_c += f.cfg.tau_d;
        for k in 0..3 {
            let e =
                |x: &PowerAllocation| harvested_energy(k, x, &f.cache, &f.stats, &f.plan, &f.cfg);
            let ea = e(&a);
            assert!(ea > 0.0);
            assert!((e(&a.scaled(2.0)) - 2.0 * ea).abs() <= 1e-14 * ea);
            assert!((e(&sum) - ea - e(&b)).abs() <= 1e-14 * e(&sum));
            assert!((coefs.energy(k, &a) - ea).abs() <= 1e-14 * ea);
            let e2 = harvested_energy(k, &a, &f.cache, &f.stats, &f.plan, &cfg2);
            assert!((e2 - 2.0 * ea).abs() <= 1e-14 * ea);
        }
    }

    #[test]
    fn terms_are_non_negative_on_drawn_scenarios() {
        for seed in 0..6 {
            let cfg = ScenarioConfig {
                num_aps: 4,
                num_ues: 6,
                antennas: 4,
                tau_p: 2,
                ..Default::default()
            };
            let mut r = rng::root(seed);
            let geom = place_network(&cfg, &mut r);
            let stats = draw_link_statistics(&geom, &PropagationModel::default(), &cfg, &mut r);
            let plan = assign_pilots(&cfg);
            let cache = build_cache(&stats, &plan, &cfg).unwrap();
            for k in 0..6 {
                for i in 0..6 {
                    for l in 0..4 {
                        let t = harvest_terms(k, i, l, &cache, &stats, &plan, &cfg);
                        let scale = t.total().abs();
                        assert!(t.estimate_power >= -1e-12 * scale);
                        assert!(t.los_cross >= -1e-12 * scale, "cross {t:?}");
                        assert!(t.nlos_fourth >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn rectifier_off_harvests_nothing() {
        let mut f = fixture();
        f.cfg.mu = 0.0;
        let a = alloc();
        let est = harvested_energy_oracle_all(&a, &f.cache, &f.stats, &f.plan, &f.cfg, 2000, 3);
        for (k, e) in est.iter().enumerate() {
            assert_eq!(
                harvested_energy(k, &a, &f.cache, &f.stats, &f.plan, &f.cfg),
                0.0
            );
            assert_eq!(e.mean, 0.0);
        }
    }

    #[test]
    fn ap_power_matches_monte_carlo() {
        let f = fixture();
        let a = alloc();
        let est = ap_power_oracle(&a, &f.cache, &f.stats, &f.plan, &f.cfg, 100_000, 9);
        for (l, e) in est.iter().enumerate() {
            let closed = ap_transmit_power(&a, l, &f.cache);
            assert!(
                e.z_score(closed).abs() < 4.0,
                "AP {l}: {} vs {closed} ± {}",
                e.mean,
                e.std_error
            );
        }
    }

    #[test]
    fn harvested_energy_matches_monte_carlo() {
        let f = fixture();
        let a = alloc();
        let est = harvested_energy_oracle_all(&a, &f.cache, &f.stats, &f.plan, &f.cfg, 200_000, 10);
        for (k, e) in est.iter().enumerate() {
            let closed = harvested_energy(k, &a, &f.cache, &f.stats, &f.plan, &f.cfg);
            assert!(
                e.z_score(closed).abs() < 3.0,
                "UE {k}: {} vs {closed} ± {}",
                e.mean,
                e.std_error
            );
        }
    }
}
