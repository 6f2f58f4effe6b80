//! Per-coherence-block channel draws and despread pilot observations.
//!
//! This is the Monte Carlo substrate: closed-form statistics elsewhere in the
//! crate are checked against sample averages built from these draws.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::ScenarioConfig;
use crate::estimation::PilotPlan;
use crate::geometry::ChannelStatistics;
use crate::linalg::CVector;

/// Circularly symmetric complex Gaussian with variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

pub fn fill_complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64, out: &mut [Complex64]) {
    for v in out {
        *v = complex_normal(rng, var);
    }
}

/// One block's channel realization, indexed `[k*L + l]`.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub num_aps: usize,
    pub num_ues: usize,
    pub g: Vec<CVector>,
    /// Drawn LOS phases.
    pub theta: Vec<f64>,
}

impl ChannelRealization {
    pub fn get(&self, k: usize, l: usize) -> &[Complex64] {
        &self.g[k * self.num_aps + l]
    }
}

/// `g_kl = e^{jθ_kl} ḡ_kl + g̃_kl` for every link.
pub fn sample_realization<R: Rng + ?Sized>(
    stats: &ChannelStatistics,
    rng: &mut R,
) -> ChannelRealization {
    let n = stats.antennas;
    let mut g = Vec::with_capacity(stats.num_ues * stats.num_aps);
    let mut theta = Vec::with_capacity(stats.num_ues * stats.num_aps);
    for k in 0..stats.num_ues {
        for l in 0..stats.num_aps {
            let link = stats.link(k, l);
            let phase: f64 = rng.random::<f64>() * TAU;
            let rot = Complex64::from_polar(1.0, phase);
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            fill_complex_normal(rng, link.beta, &mut v);
            for (x, m) in v.iter_mut().zip(&link.los_mean) {
                *x += rot * m;
            }
            g.push(v);
            theta.push(phase);
        }
    }
    ChannelRealization {
        num_aps: stats.num_aps,
        num_ues: stats.num_ues,
        g,
        theta,
    }
}

/// Despread pilot statistics `z_kl`, indexed `[k*L + l]`.
#[derive(Debug, Clone)]
pub struct PilotObservation {
    pub num_aps: usize,
    pub num_ues: usize,
    z: Vec<CVector>,
}

impl PilotObservation {
    /// From explicit `z[k*L + l]` vectors.
    pub fn from_parts(num_ues: usize, num_aps: usize, z: Vec<CVector>) -> Self {
        assert_eq!(z.len(), num_ues * num_aps);
        Self {
            num_aps,
            num_ues,
            z,
        }
    }

    pub fn get(&self, k: usize, l: usize) -> &[Complex64] {
        &self.z[k * self.num_aps + l]
    }
}

/// `z_kl = √(ρ_pτ_p) Σ_{i∈P_k} g_il + n_kl`.
///
/// One noise vector is drawn per (pilot, AP) pair, so co-pilot UEs observe the
/// identical statistic.
pub fn sample_pilot_observation<R: Rng + ?Sized>(
    real: &ChannelRealization,
    stats: &ChannelStatistics,
    plan: &PilotPlan,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> PilotObservation {
    let (l_count, k_count, n) = (stats.num_aps, stats.num_ues, stats.antennas);
    let amp = cfg.pilot_energy_gain().sqrt();
    let num_pilots = plan.num_pilots();
    let mut per_pilot: Vec<Option<CVector>> = vec![None; num_pilots * l_count];
    for pilot in plan.pilots_in_use() {
        for l in 0..l_count {
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            fill_complex_normal(rng, cfg.sigma2, &mut z);
            for i in (0..k_count).filter(|&i| plan.pilot_of(i) == pilot) {
                for (acc, v) in z.iter_mut().zip(real.get(i, l)) {
                    *acc += v * amp;
                }
            }
            per_pilot[pilot * l_count + l] = Some(z);
        }
    }
    let z = (0..k_count)
        .flat_map(|k| (0..l_count).map(move |l| (k, l)))
        .map(|(k, l)| per_pilot[plan.pilot_of(k) * l_count + l].clone().unwrap())
        .collect();
    PilotObservation {
        num_aps: l_count,
        num_ues: k_count,
        z,
    }
}
