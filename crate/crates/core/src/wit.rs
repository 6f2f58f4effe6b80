//! Uplink information transfer: MR decoding at the APs, large-scale fading
//! decoding (LSFD) at the CPU.
//!
//! The effective SINR of UE `k` is a generalized Rayleigh quotient in its LSFD
//! vector `a_k`, built from long-term statistics `b_k`, `C_kk'` and `D_k` that
//! are computed once per setup.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{complex_normal, sample_pilot_observation, sample_realization};
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::estimation::{lmmse_estimate, EstimationCache, PilotPlan};
use crate::geometry::ChannelStatistics;
use crate::linalg::{dot, norm_sqr, CVector, ComplexMatrix};
use crate::montecarlo::{run_batched, ComplexMean, Estimate, RealMean};
use crate::wpt::{contamination_factors, harvest_terms};

/// LSFD vectors `a_k`, one complex L-vector per UE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LsfdWeights {
    pub a: Vec<CVector>,
}

impl LsfdWeights {
    pub fn ones(num_ues: usize, num_aps: usize) -> Self {
        Self {
            a: vec![vec![Complex64::new(1.0, 0.0); num_aps]; num_ues],
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeStatistics {
    pub num_aps: usize,
    pub num_ues: usize,
    /// `b[k][l] = E{ĝ_klᴴ g_kl}`, real and non-negative.
    pub b: Vec<Vec<f64>>,
    /// `c[k*K + k']` is the L×L matrix `C_kk'`.
    pub c: Vec<ComplexMatrix>,
    /// `d[k][l] = σ² tr(R̂_kl)`, the diagonal of `D_k`.
    pub d: Vec<Vec<f64>>,
}

impl SeStatistics {
    pub fn c(&self, k: usize, kp: usize) -> &ComplexMatrix {
        &self.c[k * self.num_ues + kp]
    }

    pub fn b_complex(&self, k: usize) -> CVector {
        self.b[k].iter().map(|&v| Complex64::new(v, 0.0)).collect()
    }

    /// `Σ_k' η_k' C_kk' + D_k`.
    pub fn interference_plus_noise(&self, k: usize, eta: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::from_real_diagonal(&self.d[k]);
        for (kp, &e) in eta.iter().enumerate() {
            if e != 0.0 {
                m.add_scaled(self.c(k, kp), e);
            }
        }
        m
    }
}

/// Closed-form `b_k`, `C_kk'`, `D_k` for every UE.
pub fn lsfd_statistics(
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
) -> SeStatistics {
    lsfd_statistics_with(cache, stats, plan, cfg, true)
}

/// As [`lsfd_statistics`]; with `contamination = false` every `𝟙{k'∈P_k}` term
/// is dropped (diagnostic only).
pub fn lsfd_statistics_with(
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
    contamination: bool,
) -> SeStatistics {
    let (kk, ll) = (cache.num_ues, cache.num_aps);
    let gain = cfg.pilot_energy_gain();

    // f[k][k'][l] = ḡ_k'lᴴ Ψ_kl⁻¹ R_kl ḡ_k'l + β_k'l tr(Ψ_kl⁻¹ R_kl), needed for k' ∈ P_k
    let coherent = |k: usize, kp: usize, l: usize| -> Complex64 {
        let (quad, tr) = contamination_factors(cache, stats, k, kp, l);
        quad + cache.link(kp, l).beta * tr
    };

    let b: Vec<Vec<f64>> = (0..kk)
        .map(|k| (0..ll).map(|l| gain * coherent(k, k, l).re).collect())
        .collect();
    let d: Vec<Vec<f64>> = (0..kk)
        .map(|k| (0..ll).map(|l| cfg.sigma2 * cache.tr_r_hat(k, l)).collect())
        .collect();

    let mut c = Vec::with_capacity(kk * kk);
    for k in 0..kk {
        for kp in 0..kk {
            let shared = contamination && plan.shares_pilot(k, kp);
            let mut m = ComplexMatrix::zeros(ll, ll);
            for l in 0..ll {
                let t = harvest_terms(kp, k, l, cache, stats, plan, cfg);
                let diag = if shared { t.total() } else { t.estimate_power };
                m[(l, l)] = Complex64::new(diag, 0.0);
            }
            if shared {
                let f: Vec<Complex64> = (0..ll).map(|l| coherent(k, kp, l) * gain).collect();
                for l in 0..ll {
                    for lp in 0..ll {
                        if l != lp {
                            m[(l, lp)] = f[l] * f[lp].conj();
                        }
                    }
                }
            }
            c.push(m);
        }
    }
    SeStatistics {
        num_aps: ll,
        num_ues: kk,
        b,
        c,
        d,
    }
}

/// Numerator and denominator of `SINR_k`.
pub fn sinr_parts(k: usize, a: &[Complex64], eta: &[f64], se: &SeStatistics) -> (f64, f64) {
    let ab = dot(a, &se.b_complex(k)).norm_sqr();
    let signal = eta[k] * ab;
    let mut interference = 0.0;
    for (kp, &e) in eta.iter().enumerate() {
        if e != 0.0 {
            interference += e * se.c(k, kp).bilinear(a, a).re;
        }
    }
    let noise: f64 = a.iter().zip(&se.d[k]).map(|(x, d)| x.norm_sqr() * d).sum();
    (signal, interference - signal + noise)
}

/// Effective SINR of UE `k` under LSFD vector `a` and uplink powers `eta`.
pub fn sinr(k: usize, a: &[Complex64], eta: &[f64], se: &SeStatistics) -> Result<f64> {
    if norm_sqr(a) == 0.0 {
        return Err(Error::Invalid(format!("LSFD vector of UE {k} is zero")));
    }
    let (num, den) = sinr_parts(k, a, eta, se);
    let noise: f64 = a.iter().zip(&se.d[k]).map(|(x, d)| x.norm_sqr() * d).sum();
    if !(den > 1e-12 * noise) {
        return Err(Error::NonPositiveDenominator(den));
    }
    Ok(num / den)
}

/// `(τ_u/τ_c) log₂(1 + SINR)` in bits/s/Hz.
pub fn spectral_efficiency(sinr: f64, cfg: &ScenarioConfig) -> f64 {
    cfg.uplink_fraction() * (1.0 + sinr).log2()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl From<&ComplexMean> for ComplexEstimate {
    fn from(m: &ComplexMean) -> Self {
        Self {
            re: m.re.estimate(),
            im: m.im.estimate(),
        }
    }
}

impl ComplexEstimate {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re.mean, self.im.mean)
    }

    /// Larger of the real and imaginary z-scores in magnitude.
    pub fn max_abs_z(&self, reference: Complex64) -> f64 {
        self.re
            .z_score(reference.re)
            .abs()
            .max(self.im.z_score(reference.im).abs())
    }
}

/// Monte Carlo estimates of `b_k`, `C_kk'` and `D_k`.
#[derive(Debug, Clone)]
pub struct SeOracle {
    pub num_aps: usize,
    pub num_ues: usize,
    /// `b[k][l]`.
    pub b: Vec<Vec<ComplexEstimate>>,
    /// `c[(k*K + k')*L*L + l*L + l']`.
    c: Vec<ComplexEstimate>,
    /// `d[k][l]`.
    pub d: Vec<Vec<Estimate>>,
}

impl SeOracle {
    pub fn c(&self, k: usize, kp: usize, l: usize, lp: usize) -> ComplexEstimate {
        let (kk, ll) = (self.num_ues, self.num_aps);
        self.c[(k * kk + kp) * ll * ll + l * ll + lp]
    }
}

#[derive(Clone)]
struct SeAccumulator {
    b: Vec<ComplexMean>,
    c: Vec<ComplexMean>,
    d: Vec<RealMean>,
}

/// Sample means of `ĝ_klᴴg_kl`, `ĝ_klᴴg_k'l g_k'l'ᴴĝ_kl'` and `σ²‖ĝ_kl‖²`
/// over joint fresh draws of channels and pilot noise.
pub fn se_statistics_oracle(
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
    mc_samples: usize,
    seed: u64,
) -> SeOracle {
    let (kk, ll) = (cache.num_ues, cache.num_aps);
    let acc = run_batched(
        seed,
        mc_samples,
        || SeAccumulator {
            b: vec![ComplexMean::default(); kk * ll],
            c: vec![ComplexMean::default(); kk * kk * ll * ll],
            d: vec![RealMean::default(); kk * ll],
        },
        |acc, rng| {
            let real = sample_realization(stats, rng);
            let z = sample_pilot_observation(&real, stats, plan, cfg, rng);
            let g_hat = lmmse_estimate(&z, cache);
            // x[(k*K + k')*L + l] = ĝ_klᴴ g_k'l
            let mut x = vec![Complex64::new(0.0, 0.0); kk * kk * ll];
            for k in 0..kk {
                for kp in 0..kk {
                    for l in 0..ll {
                        x[(k * kk + kp) * ll + l] = dot(&g_hat[k * ll + l], real.get(kp, l));
                    }
                }
            }
            for k in 0..kk {
                for l in 0..ll {
                    acc.b[k * ll + l].push(x[(k * kk + k) * ll + l]);
                    acc.d[k * ll + l].push(cfg.sigma2 * norm_sqr(&g_hat[k * ll + l]));
                }
                for kp in 0..kk {
                    let row = &x[(k * kk + kp) * ll..(k * kk + kp + 1) * ll];
                    for l in 0..ll {
                        for lp in 0..ll {
                            acc.c[(k * kk + kp) * ll * ll + l * ll + lp]
                                .push(row[l] * row[lp].conj());
                        }
                    }
                }
            }
        },
        |total, part| {
            for (t, p) in total.b.iter_mut().zip(&part.b) {
                t.merge(p);
            }
            for (t, p) in total.c.iter_mut().zip(&part.c) {
                t.merge(p);
            }
            for (t, p) in total.d.iter_mut().zip(&part.d) {
                t.merge(p);
            }
        },
    );
    SeOracle {
        num_aps: ll,
        num_ues: kk,
        b: (0..kk)
            .map(|k| {
                (0..ll)
                    .map(|l| ComplexEstimate::from(&acc.b[k * ll + l]))
                    .collect()
            })
            .collect(),
        c: acc.c.iter().map(ComplexEstimate::from).collect(),
        d: (0..kk)
            .map(|k| (0..ll).map(|l| acc.d[k * ll + l].estimate()).collect())
            .collect(),
    }
}

/// Empirical SINR of UE `k` assembled from simulated desired-signal,
/// gain-uncertainty, interference and noise terms of the CPU's combined signal.
#[allow(clippy::too_many_arguments)]
pub fn sinr_oracle(
    k: usize,
    a: &[Complex64],
    eta: &[f64],
    cache: &EstimationCache,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
    mc_samples: usize,
    seed: u64,
) -> f64 {
    let (kk, ll, n) = (cache.num_ues, cache.num_aps, cache.antennas);
    #[derive(Clone)]
    struct Acc {
        mean_u: ComplexMean,
        power_u: Vec<RealMean>,
        noise: RealMean,
    }
    let acc = run_batched(
        seed,
        mc_samples,
        || Acc {
            mean_u: ComplexMean::default(),
            power_u: vec![RealMean::default(); kk],
            noise: RealMean::default(),
        },
        |acc, rng| {
            let real = sample_realization(stats, rng);
            let z = sample_pilot_observation(&real, stats, plan, cfg, rng);
            let g_hat = lmmse_estimate(&z, cache);
            for kp in 0..kk {
                let u: Complex64 = (0..ll)
                    .map(|l| a[l].conj() * dot(&g_hat[k * ll + l], real.get(kp, l)))
                    .sum();
                if kp == k {
                    acc.mean_u.push(u);
                }
                acc.power_u[kp].push(u.norm_sqr());
            }
            let mut w = Complex64::new(0.0, 0.0);
            for l in 0..ll {
                let noise: CVector = (0..n).map(|_| complex_normal(rng, cfg.sigma2)).collect();
                w += a[l].conj() * dot(&g_hat[k * ll + l], &noise);
            }
            acc.noise.push(w.norm_sqr());
        },
        |t, p| {
            t.mean_u.merge(&p.mean_u);
            for (x, y) in t.power_u.iter_mut().zip(&p.power_u) {
                x.merge(y);
            }
            t.noise.merge(&p.noise);
        },
    );
    // DS = √η_k E{u_k}; BU and UI enter through second moments of u_k'
    let ds = eta[k] * acc.mean_u.mean().norm_sqr();
    let total: f64 = (0..kk).map(|kp| eta[kp] * acc.power_u[kp].mean()).sum();
    ds / (total - ds + acc.noise.mean())
}
