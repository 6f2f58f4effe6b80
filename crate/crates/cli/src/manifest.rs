use serde::{Deserialize, Serialize};
use wpcf_core::{ScenarioConfig, SolveStatus};

pub const MMF: &str = "MMF";
pub const FPC: &str = "FPC";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeRecord {
    pub scheme: String,
    pub status: SolveStatus,
    /// Certified minimum SINR (linear).
    pub t_star: f64,
    pub min_se: f64,
    pub per_ue_se: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetupRecord {
    pub setup_id: usize,
    pub setup_seed: u64,
    pub schemes: Vec<SchemeRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_path: Option<String>,
    pub subcommand: String,
    pub setups: usize,
    pub out_dir: String,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub records: Vec<SetupRecord>,
}

impl RunManifest {
    pub fn schemes(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for s in self.records.iter().flat_map(|r| &r.schemes) {
            if !names.contains(&s.scheme) {
                names.push(s.scheme.clone());
            }
        }
        names
    }
}
