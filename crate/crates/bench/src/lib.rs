//! Shared fixtures for the criterion benches.

use wpcf_core::{setup_seed, ScenarioConfig, SetupModel};

/// Scenario with the given sizes and `τ_p = K/2` pilots.
pub fn scenario(num_aps: usize, antennas: usize, num_ues: usize) -> ScenarioConfig {
    let d = ScenarioConfig::default();
    let tau_p = (num_ues / 2).max(1);
    ScenarioConfig {
        num_aps,
        antennas,
        num_ues,
        tau_p,
        tau_u: d.tau_c - d.tau_d - tau_p,
        ..d
    }
}

pub fn small() -> ScenarioConfig {
    scenario(4, 4, 4)
}

pub fn default_scale() -> ScenarioConfig {
    ScenarioConfig::default()
}

/// First setup in the sweep rooted at `seed` whose max-min problem is feasible.
pub fn feasible_setup(cfg: &ScenarioConfig, seed: u64) -> SetupModel {
    (0..)
        .map(|i| SetupModel::draw(cfg, setup_seed(seed, i)).expect("valid scenario"))
        .find(|m| wpcf_core::maxmin::upper_bound_tmax(m, cfg).is_ok_and(|t| t > 0.0))
        .expect("unbounded search")
}
