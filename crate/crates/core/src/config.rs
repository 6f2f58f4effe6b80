//! Scenario parameters and the flat key/value config file.
//!
//! Powers are held in watts. The file may give any power either in watts
//! (`rho_p`, `rho_d`, `sigma2`) or in dBm (`rho_p_dbm`, ...); conversion happens
//! once, here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LosProbability, PathLossCoeffs, PropagationModel, RicianFactor};

pub fn dbm_to_watt(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Number of APs.
    pub num_aps: usize,
    /// Number of UEs.
    pub num_ues: usize,
    /// Antennas per AP.
    pub antennas: usize,
    /// Side of the square deployment area (m).
    pub area_side: f64,
    /// AP/UE height difference (m).
    pub height_diff: f64,
    /// Carrier frequency (GHz).
    pub carrier_freq: f64,
    /// Bandwidth (Hz). Informational; the noise power is given directly.
    pub bandwidth: f64,
    pub tau_c: usize,
    pub tau_p: usize,
    pub tau_d: usize,
    pub tau_u: usize,
    /// Pilot power (W).
    pub rho_p: f64,
    /// Per-AP power limit (W).
    pub rho_d: f64,
    /// Noise power (W).
    pub sigma2: f64,
    /// Rectifier efficiency.
    pub mu: f64,
    pub seed: u64,
    pub mc_samples: usize,
    /// Place APs uniformly at random even when `L` is a perfect square.
    pub random_ap_placement: bool,
    pub propagation: PropagationModel,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            num_aps: 16,
            num_ues: 20,
            antennas: 25,
            area_side: 100.0,
            height_diff: 4.0,
            carrier_freq: 3.4,
            bandwidth: 20e6,
            tau_c: 200,
            tau_p: 5,
            tau_d: 25,
            tau_u: 170,
            rho_p: dbm_to_watt(-40.0),
            rho_d: 0.25,
            sigma2: dbm_to_watt(-96.0),
            mu: 0.5,
            seed: 0,
            mc_samples: 100_000,
            random_ap_placement: false,
            propagation: PropagationModel::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.num_aps == 0 || self.num_ues == 0 || self.antennas == 0 {
            return bad("L, K and N must all be at least 1".into());
        }
        if self.tau_p == 0 || self.tau_d == 0 || self.tau_u == 0 {
            return bad("tau_p, tau_d and tau_u must all be at least 1".into());
        }
        if self.tau_p + self.tau_d + self.tau_u != self.tau_c {
            return bad(format!(
                "tau_p + tau_d + tau_u = {} but tau_c = {}",
                self.tau_p + self.tau_d + self.tau_u,
                self.tau_c
            ));
        }
        for (name, v) in [
            ("rho_p", self.rho_p),
            ("rho_d", self.rho_d),
            ("sigma2", self.sigma2),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be a positive finite power, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return bad(format!("mu must lie in [0, 1], got {}", self.mu));
        }
        if !(self.area_side > 0.0) || !(self.height_diff >= 0.0) || !(self.carrier_freq > 0.0) {
            return bad(
                "area_side and carrier_freq must be positive, height_diff non-negative".into(),
            );
        }
        if self.mc_samples == 0 {
            return bad("mc_samples must be positive".into());
        }
        self.propagation.validate()
    }

    /// `ρ_p τ_p`.
    pub fn pilot_energy_gain(&self) -> f64 {
        self.rho_p * self.tau_p as f64
    }

    /// Energy each UE spends on its pilot, `τ_p ρ_p`.
    pub fn pilot_energy(&self) -> f64 {
        self.tau_p as f64 * self.rho_p
    }

    pub fn uplink_fraction(&self) -> f64 {
        self.tau_u as f64 / self.tau_c as f64
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        raw.resolve()
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Serializes back into the flat key/value format (powers in watts).
    pub fn to_toml_string(&self) -> String {
        let p = &self.propagation;
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        kv("L", self.num_aps.to_string());
        kv("K", self.num_ues.to_string());
        kv("N", self.antennas.to_string());
        kv("area_side", fmt_f(self.area_side));
        kv("height_diff", fmt_f(self.height_diff));
        kv("carrier_freq", fmt_f(self.carrier_freq));
        kv("bandwidth", fmt_f(self.bandwidth));
        kv("tau_c", self.tau_c.to_string());
        kv("tau_p", self.tau_p.to_string());
        kv("tau_d", self.tau_d.to_string());
        kv("tau_u", self.tau_u.to_string());
        kv("rho_p", fmt_f(self.rho_p));
        kv("rho_d", fmt_f(self.rho_d));
        kv("sigma2", fmt_f(self.sigma2));
        kv("mu", fmt_f(self.mu));
        kv("seed", self.seed.to_string());
        kv("mc_samples", self.mc_samples.to_string());
        kv("random_ap_placement", self.random_ap_placement.to_string());
        kv("pl_los_a", fmt_f(p.pathloss_los.slope));
        kv("pl_los_b", fmt_f(p.pathloss_los.intercept));
        kv("pl_los_c", fmt_f(p.pathloss_los.freq_slope));
        kv("pl_nlos_a", fmt_f(p.pathloss_nlos.slope));
        kv("pl_nlos_b", fmt_f(p.pathloss_nlos.intercept));
        kv("pl_nlos_c", fmt_f(p.pathloss_nlos.freq_slope));
        kv("shadow_std_los", fmt_f(p.shadow_std_los));
        kv("shadow_std_nlos", fmt_f(p.shadow_std_nlos));
        kv("los_d1", fmt_f(p.los_probability.full_los_until));
        kv("los_d2", fmt_f(p.los_probability.floor_from));
        kv("los_decay", fmt_f(p.los_probability.decay));
        kv("los_floor", fmt_f(p.los_probability.floor));
        kv("rician_k_db", fmt_f(p.rician_factor.k_db_at_zero));
        kv("rician_k_db_slope", fmt_f(p.rician_factor.k_db_slope));
        out
    }
}

// Debug formatting keeps a decimal point, so values re-parse as floats.
fn fmt_f(v: f64) -> String {
    format!("{v:?}")
}

/// On-disk shape. Every key is optional and falls back to the default scenario.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(rename = "L")]
    l: Option<usize>,
    #[serde(rename = "K")]
    k: Option<usize>,
    #[serde(rename = "N")]
    n: Option<usize>,
    area_side: Option<f64>,
    height_diff: Option<f64>,
    carrier_freq: Option<f64>,
    bandwidth: Option<f64>,
    tau_c: Option<usize>,
    tau_p: Option<usize>,
    tau_d: Option<usize>,
    tau_u: Option<usize>,
    rho_p: Option<f64>,
    rho_p_dbm: Option<f64>,
    rho_d: Option<f64>,
    rho_d_dbm: Option<f64>,
    sigma2: Option<f64>,
    sigma2_dbm: Option<f64>,
    mu: Option<f64>,
    seed: Option<u64>,
    mc_samples: Option<usize>,
    random_ap_placement: Option<bool>,
    pl_los_a: Option<f64>,
    pl_los_b: Option<f64>,
    pl_los_c: Option<f64>,
    pl_nlos_a: Option<f64>,
    pl_nlos_b: Option<f64>,
    pl_nlos_c: Option<f64>,
    shadow_std_los: Option<f64>,
    shadow_std_nlos: Option<f64>,
    los_d1: Option<f64>,
    los_d2: Option<f64>,
    los_decay: Option<f64>,
    los_floor: Option<f64>,
    rician_k_db: Option<f64>,
    rician_k_db_slope: Option<f64>,
}

fn power(name: &str, watt: Option<f64>, dbm: Option<f64>, default: f64) -> Result<f64> {
    match (watt, dbm) {
        (Some(_), Some(_)) => Err(Error::Config(format!(
            "both {name} and {name}_dbm given; use one"
        ))),
        (Some(w), None) => Ok(w),
        (None, Some(d)) => Ok(dbm_to_watt(d)),
        (None, None) => Ok(default),
    }
}

impl RawConfig {
    fn resolve(self) -> Result<ScenarioConfig> {
        let d = ScenarioConfig::default();
        let dp = d.propagation.clone();
        let propagation = PropagationModel {
            pathloss_los: PathLossCoeffs {
                slope: self.pl_los_a.unwrap_or(dp.pathloss_los.slope),
                intercept: self.pl_los_b.unwrap_or(dp.pathloss_los.intercept),
                freq_slope: self.pl_los_c.unwrap_or(dp.pathloss_los.freq_slope),
            },
            pathloss_nlos: PathLossCoeffs {
                slope: self.pl_nlos_a.unwrap_or(dp.pathloss_nlos.slope),
                intercept: self.pl_nlos_b.unwrap_or(dp.pathloss_nlos.intercept),
                freq_slope: self.pl_nlos_c.unwrap_or(dp.pathloss_nlos.freq_slope),
            },
            shadow_std_los: self.shadow_std_los.unwrap_or(dp.shadow_std_los),
            shadow_std_nlos: self.shadow_std_nlos.unwrap_or(dp.shadow_std_nlos),
            los_probability: LosProbability {
                full_los_until: self.los_d1.unwrap_or(dp.los_probability.full_los_until),
                floor_from: self.los_d2.unwrap_or(dp.los_probability.floor_from),
                decay: self.los_decay.unwrap_or(dp.los_probability.decay),
                floor: self.los_floor.unwrap_or(dp.los_probability.floor),
            },
            rician_factor: RicianFactor {
                k_db_at_zero: self.rician_k_db.unwrap_or(dp.rician_factor.k_db_at_zero),
                k_db_slope: self
                    .rician_k_db_slope
                    .unwrap_or(dp.rician_factor.k_db_slope),
            },
        };
        let tau_p = self.tau_p.unwrap_or(d.tau_p);
        let tau_d = self.tau_d.unwrap_or(d.tau_d);
        let tau_u = self.tau_u.unwrap_or(d.tau_u);
        let cfg = ScenarioConfig {
            num_aps: self.l.unwrap_or(d.num_aps),
            num_ues: self.k.unwrap_or(d.num_ues),
            antennas: self.n.unwrap_or(d.antennas),
            area_side: self.area_side.unwrap_or(d.area_side),
            height_diff: self.height_diff.unwrap_or(d.height_diff),
            carrier_freq: self.carrier_freq.unwrap_or(d.carrier_freq),
            bandwidth: self.bandwidth.unwrap_or(d.bandwidth),
            // an omitted tau_c follows the other three
            tau_c: self.tau_c.unwrap_or(tau_p + tau_d + tau_u),
            tau_p,
            tau_d,
            tau_u,
            rho_p: power("rho_p", self.rho_p, self.rho_p_dbm, d.rho_p)?,
            rho_d: power("rho_d", self.rho_d, self.rho_d_dbm, d.rho_d)?,
            sigma2: power("sigma2", self.sigma2, self.sigma2_dbm, d.sigma2)?,
            mu: self.mu.unwrap_or(d.mu),
            seed: self.seed.unwrap_or(d.seed),
            mc_samples: self.mc_samples.unwrap_or(d.mc_samples),
            random_ap_placement: self.random_ap_placement.unwrap_or(d.random_ap_placement),
            propagation,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversions() {
        assert!((dbm_to_watt(-96.0) - 2.5119e-13).abs() < 1e-17);
        assert!((dbm_to_watt(-40.0) - 1e-7).abs() < 1e-20);
        assert!((dbm_to_watt(30.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn defaults_match_reference_scenario() {
        let cfg = ScenarioConfig::from_toml_str("").unwrap();
        assert_eq!((cfg.num_aps, cfg.num_ues, cfg.antennas), (16, 20, 25));
        assert_eq!(
            (cfg.tau_c, cfg.tau_p, cfg.tau_d, cfg.tau_u),
            (200, 5, 25, 170)
        );
        assert_eq!(cfg.rho_d, 0.25);
        assert_eq!(cfg.mu, 0.5);
        assert_eq!(cfg.carrier_freq, 3.4);
        assert_eq!(cfg.height_diff, 4.0);
        assert_eq!(cfg.area_side, 100.0);
    }

    #[test]
    fn parses_flat_keys_and_dbm() {
        let cfg = ScenarioConfig::from_toml_str(
            "L = 4\nK = 3\nN = 2\ntau_c = 20\ntau_p = 2\ntau_d = 5\ntau_u = 13\nsigma2_dbm = -96\nrho_d = 1.0\nseed = 9\n",
        )
        .unwrap();
        assert_eq!((cfg.num_aps, cfg.num_ues, cfg.antennas), (4, 3, 2));
        assert!((cfg.sigma2 - 2.5119e-13).abs() < 1e-17);
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "tau_c = 100",
            "mu = 1.5",
            "rho_d = -1.0",
            "K = 0",
            "sigma2 = 1e-13\nsigma2_dbm = -96",
            "unknown_key = 3",
            "L = \"four\"",
        ] {
            assert!(ScenarioConfig::from_toml_str(text).is_err(), "{text}");
        }
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ScenarioConfig {
            num_aps: 3,
            random_ap_placement: true,
            ..Default::default()
        };
        cfg.propagation.shadow_std_los = 0.0;
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }
}
