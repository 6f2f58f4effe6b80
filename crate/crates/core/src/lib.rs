//! Wireless-powered cell-free massive MIMO uplink under Rician fading with
//! per-block random LOS phase.
//!
//! The crate covers the whole chain: layout and propagation ([`geometry`]),
//! channel draws ([`channel`]), LMMSE estimation ([`estimation`]), downlink
//! energy transfer ([`wpt`]), uplink spectral efficiency with large-scale
//! fading decoding ([`wit`]) and the max-min fair power control solver
//! ([`maxmin`]). Every closed-form statistic has a Monte Carlo counterpart for
//! validation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod config;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod linalg;
pub mod maxmin;
pub mod montecarlo;
pub mod rng;
pub mod setup;
pub mod wit;
pub mod wpt;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use estimation::{assign_pilots, build_cache, EstimationCache, PilotPlan};
pub use geometry::{ChannelStatistics, NetworkGeometry, PropagationModel};
pub use maxmin::{fpc_baseline, solve_maxmin, MaxMinResult, SolveStatus, SolverOptions};
pub use setup::{setup_seed, SetupModel};
pub use wit::{LsfdWeights, SeStatistics};
pub use wpt::{HarvestCoefficients, PowerAllocation};
