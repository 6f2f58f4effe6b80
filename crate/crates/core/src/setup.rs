//! Everything derived from one random setup, computed once and shared by the
//! solver, the baseline and the front-ends.

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::estimation::{assign_pilots, build_cache, EstimationCache, PilotPlan};
use crate::geometry::{draw_link_statistics, place_network, ChannelStatistics, NetworkGeometry};
use crate::rng;
use crate::wit::{lsfd_statistics, SeStatistics};
use crate::wpt::HarvestCoefficients;

#[derive(Debug, Clone)]
pub struct SetupModel {
    pub geometry: Option<NetworkGeometry>,
    pub stats: ChannelStatistics,
    pub plan: PilotPlan,
    pub cache: EstimationCache,
    pub se: SeStatistics,
    pub harvest: HarvestCoefficients,
}

impl SetupModel {
    /// Drops APs and UEs, draws link statistics and builds every long-term quantity.
    ///
    /// The draw depends only on `(cfg, setup_seed)`.
    pub fn draw(cfg: &ScenarioConfig, setup_seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = rng::root(setup_seed);
        let geometry = place_network(cfg, &mut rng);
        let stats = draw_link_statistics(&geometry, &cfg.propagation, cfg, &mut rng);
        let mut model = Self::from_statistics(stats, assign_pilots(cfg), cfg)?;
        model.geometry = Some(geometry);
        Ok(model)
    }

    pub fn from_statistics(
        stats: ChannelStatistics,
        plan: PilotPlan,
        cfg: &ScenarioConfig,
    ) -> Result<Self> {
        let cache = build_cache(&stats, &plan, cfg)?;
        let se = lsfd_statistics(&cache, &stats, &plan, cfg);
        let harvest = HarvestCoefficients::build(&cache, &stats, &plan, cfg);
        Ok(Self {
            geometry: None,
            stats,
            plan,
            cache,
            se,
            harvest,
        })
    }

    pub fn num_aps(&self) -> usize {
        self.cache.num_aps
    }

    pub fn num_ues(&self) -> usize {
        self.cache.num_ues
    }
}

/// Seed of setup `index` in a sweep rooted at `seed`.
pub fn setup_seed(seed: u64, index: usize) -> u64 {
    rng::child_seed(seed, index as u64)
}
