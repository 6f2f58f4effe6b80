//! Network layout and long-term propagation statistics.
//!
//! Path loss, shadowing, LOS probability and Rician factor follow the indoor
//! hotspot (InH) defaults; every coefficient can be overridden from the config.
//! The LOS component is the response of a half-wavelength uniform linear array
//! at the AP→UE azimuth.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{db_to_linear, ScenarioConfig};
use crate::error::{Error, Result};
use crate::linalg::CVector;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGeometry {
    pub ap_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub height_diff: f64,
}

/// `a·log10(d) + b + c·log10(f_c)` in dB, `d` in meters, `f_c` in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathLossCoeffs {
    pub slope: f64,
    pub intercept: f64,
    pub freq_slope: f64,
}

impl PathLossCoeffs {
    pub fn eval_db(&self, distance: f64, carrier_ghz: f64) -> f64 {
        // below 1 m the log-distance law is meaningless
        let d = distance.max(1.0);
        self.slope * d.log10() + self.intercept + self.freq_slope * carrier_ghz.log10()
    }
}

/// 1 up to `full_los_until`, `exp(-(d - full_los_until)/decay)` in between,
/// `floor` from `floor_from` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LosProbability {
    pub full_los_until: f64,
    pub floor_from: f64,
    pub decay: f64,
    pub floor: f64,
}

impl LosProbability {
    pub fn at(&self, distance: f64) -> f64 {
        if distance <= self.full_los_until {
            1.0
        } else if distance < self.floor_from {
            (-(distance - self.full_los_until) / self.decay).exp()
        } else {
            self.floor
        }
    }
}

/// Rician factor in dB, affine in distance: `κ_dB = k_db_at_zero + k_db_slope·d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicianFactor {
    pub k_db_at_zero: f64,
    pub k_db_slope: f64,
}

impl RicianFactor {
    /// Linear κ on a LOS link.
    pub fn linear(&self, distance: f64) -> f64 {
        db_to_linear(self.k_db_at_zero + self.k_db_slope * distance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropagationModel {
    pub pathloss_los: PathLossCoeffs,
    pub pathloss_nlos: PathLossCoeffs,
    /// dB
    pub shadow_std_los: f64,
    /// dB
    pub shadow_std_nlos: f64,
    pub los_probability: LosProbability,
    pub rician_factor: RicianFactor,
}

impl Default for PropagationModel {
    fn default() -> Self {
        Self {
            pathloss_los: PathLossCoeffs {
                slope: 16.9,
                intercept: 32.8,
                freq_slope: 20.0,
            },
            pathloss_nlos: PathLossCoeffs {
                slope: 43.3,
                intercept: 11.5,
                freq_slope: 20.0,
            },
            shadow_std_los: 3.0,
            shadow_std_nlos: 4.0,
            los_probability: LosProbability {
                full_los_until: 18.0,
                floor_from: 37.0,
                decay: 27.0,
                floor: 0.5,
            },
            rician_factor: RicianFactor {
                k_db_at_zero: 13.0,
                k_db_slope: -0.03,
            },
        }
    }
}

impl PropagationModel {
    pub fn validate(&self) -> Result<()> {
        let lp = &self.los_probability;
        if self.pathloss_los.slope < 0.0 || self.pathloss_nlos.slope < 0.0 {
            return Err(Error::Config(
                "path loss must not decrease with distance".into(),
            ));
        }
        if self.shadow_std_los < 0.0 || self.shadow_std_nlos < 0.0 {
            return Err(Error::Config("shadowing std must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&lp.floor)
            || !(lp.decay > 0.0)
            || lp.floor_from < lp.full_los_until
        {
            return Err(Error::Config("invalid LOS probability parameters".into()));
        }
        Ok(())
    }

    /// Same model with shadowing switched off.
    pub fn without_shadowing(&self) -> Self {
        Self {
            shadow_std_los: 0.0,
            shadow_std_nlos: 0.0,
            ..self.clone()
        }
    }
}

/// Long-term statistics of one AP–UE link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkStatistics {
    /// Per-antenna NLOS variance `β_kl`.
    pub beta: f64,
    /// LOS mean `ḡ_kl` (before the random phase).
    pub los_mean: CVector,
    /// Total gain `β^tot` (per antenna).
    pub total_gain: f64,
    /// Linear Rician factor; zero on NLOS links.
    pub kappa: f64,
    pub distance: f64,
    pub is_los: bool,
}

/// Long-term statistics of every link, indexed `[k][l]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelStatistics {
    pub num_aps: usize,
    pub num_ues: usize,
    pub antennas: usize,
    links: Vec<LinkStatistics>,
}

impl ChannelStatistics {
    /// Assembles statistics from explicit `(β_kl, ḡ_kl)` pairs, `links[k][l]`.
    pub fn from_links(links: Vec<Vec<(f64, CVector)>>) -> Result<Self> {
        let num_ues = links.len();
        let num_aps = links.first().map_or(0, Vec::len);
        let antennas = links
            .first()
            .and_then(|r| r.first())
            .map_or(0, |(_, g)| g.len());
        if num_ues == 0 || num_aps == 0 || antennas == 0 {
            return Err(Error::Dimension("empty channel statistics".into()));
        }
        let mut flat = Vec::with_capacity(num_ues * num_aps);
        for row in links {
            if row.len() != num_aps {
                return Err(Error::Dimension("ragged link table".into()));
            }
            for (beta, los_mean) in row {
                if los_mean.len() != antennas {
                    return Err(Error::Dimension("LOS vectors differ in length".into()));
                }
                if !(beta > 0.0) {
                    return Err(Error::Invalid(format!("beta must be positive, got {beta}")));
                }
                let los_power = crate::linalg::norm_sqr(&los_mean) / antennas as f64;
                flat.push(LinkStatistics {
                    beta,
                    total_gain: beta + los_power,
                    kappa: los_power / beta,
                    is_los: los_power > 0.0,
                    los_mean,
                    distance: f64::NAN,
                });
            }
        }
        Ok(Self {
            num_aps,
            num_ues,
            antennas,
            links: flat,
        })
    }

    pub fn link(&self, k: usize, l: usize) -> &LinkStatistics {
        &self.links[k * self.num_aps + l]
    }

    pub fn beta(&self, k: usize, l: usize) -> f64 {
        self.link(k, l).beta
    }

    pub fn los_mean(&self, k: usize, l: usize) -> &[Complex64] {
        &self.link(k, l).los_mean
    }
}

/// Places APs and drops UEs.
///
/// APs sit on a centered `√L×√L` grid when `L` is a perfect square (and random
/// placement is not forced); otherwise they are uniform in the square.
pub fn place_network<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> NetworkGeometry {
    let side = cfg.area_side;
    let l = cfg.num_aps;
    let root = (l as f64).sqrt().round() as usize;
    let uniform = |rng: &mut R| [rng.random::<f64>() * side, rng.random::<f64>() * side];

    let ap_positions = if root * root == l && !cfg.random_ap_placement {
        let pitch = side / root as f64;
        (0..l)
            .map(|i| {
                let (row, col) = (i / root, i % root);
                [pitch * (col as f64 + 0.5), pitch * (row as f64 + 0.5)]
            })
            .collect()
    } else {
        (0..l).map(|_| uniform(rng)).collect()
    };
    let ue_positions = (0..cfg.num_ues).map(|_| uniform(rng)).collect();
    NetworkGeometry {
        ap_positions,
        ue_positions,
        height_diff: cfg.height_diff,
    }
}

pub fn link_distance(ap: Point, ue: Point, height_diff: f64) -> f64 {
    let dx = ue[0] - ap[0];
    let dy = ue[1] - ap[1];
    (dx * dx + dy * dy + height_diff * height_diff).sqrt()
}

/// Half-wavelength ULA response `[1, e^{jπ sinφ}, …]` with unit-modulus entries.
pub fn ula_response(antennas: usize, azimuth: f64) -> CVector {
    let step = PI * azimuth.sin();
    (0..antennas)
        .map(|n| Complex64::from_polar(1.0, step * n as f64))
        .collect()
}

/// Draws the LOS state and shadowing of every link and splits the total gain
/// into LOS mean and NLOS variance.
///
/// Draw order is UE-major, then AP: one uniform for the LOS state followed by
/// one normal for shadowing, so a fixed RNG state yields identical statistics.
pub fn draw_link_statistics<R: Rng + ?Sized>(
    geom: &NetworkGeometry,
    prop: &PropagationModel,
    cfg: &ScenarioConfig,
    rng: &mut R,
) -> ChannelStatistics {
    let n = cfg.antennas;
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut links = Vec::with_capacity(geom.ue_positions.len() * geom.ap_positions.len());
    for ue in &geom.ue_positions {
        for ap in &geom.ap_positions {
            let distance = link_distance(*ap, *ue, geom.height_diff);
            let is_los = rng.random::<f64>() < prop.los_probability.at(distance);
            let z: f64 = std_normal.sample(rng);
            let (pl, shadow_std) = if is_los {
                (
                    prop.pathloss_los.eval_db(distance, cfg.carrier_freq),
                    prop.shadow_std_los,
                )
            } else {
                (
                    prop.pathloss_nlos.eval_db(distance, cfg.carrier_freq),
                    prop.shadow_std_nlos,
                )
            };
            let total_gain = db_to_linear(-(pl + shadow_std * z));
            let kappa = if is_los {
                prop.rician_factor.linear(distance)
            } else {
                0.0
            };
            let beta = total_gain / (kappa + 1.0);
            let los_amp = (kappa / (kappa + 1.0) * total_gain).sqrt();
            let azimuth = (ue[1] - ap[1]).atan2(ue[0] - ap[0]);
            let los_mean = if is_los {
                ula_response(n, azimuth)
                    .into_iter()
                    .map(|v| v * los_amp)
                    .collect()
            } else {
                vec![Complex64::new(0.0, 0.0); n]
            };
            links.push(LinkStatistics {
                beta,
                los_mean,
                total_gain,
                kappa,
                distance,
                is_los,
            });
        }
    }
    ChannelStatistics {
        num_aps: geom.ap_positions.len(),
        num_ues: geom.ue_positions.len(),
        antennas: n,
        links,
    }
}
