use std::fmt::Write as _;
use std::fs;

use anyhow::{anyhow, Context};

use crate::args::CdfArgs;
use crate::manifest::RunManifest;
use crate::{CliError, CliResult};

/// Sorted samples with empirical probabilities `i/n`.
pub fn empirical_cdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i + 1) as f64 / n))
        .collect()
}

/// Value where the empirical CDF reaches `level`: the `⌈level·n⌉`-th smallest sample.
pub fn likely_value(samples: &[f64], level: f64) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = ((level * v.len() as f64).ceil() as usize).clamp(1, v.len());
    Some(v[rank - 1])
}

pub fn cdf_csv(samples: &[f64]) -> String {
    let mut out = String::from("value,probability\n");
    for (x, p) in empirical_cdf(samples) {
        writeln!(out, "{x},{p}").unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scheme: String,
    pub metric: &'static str,
    pub count: usize,
    pub likely_90: f64,
    pub likely_95: f64,
    pub median: f64,
}

/// `(file name, CSV body)`.
pub type CsvFile = (String, String);

pub fn summarize(manifest: &RunManifest) -> anyhow::Result<(Vec<SummaryRow>, Vec<CsvFile>)> {
    if manifest.records.is_empty() {
        return Err(anyhow!("manifest has no setup records"));
    }
    let mut rows = Vec::new();
    let mut files = Vec::new();
    for scheme in manifest.schemes() {
        let entries: Vec<_> = manifest
            .records
            .iter()
            .flat_map(|r| r.schemes.iter().filter(|s| s.scheme == scheme))
            .collect();
        let min_se: Vec<f64> = entries.iter().map(|s| s.min_se).collect();
        let per_ue: Vec<f64> = entries
            .iter()
            .flat_map(|s| s.per_ue_se.iter().copied())
            .collect();
        let tag = scheme.to_lowercase();
        for (metric, samples) in [("min_se", &min_se), ("se_per_ue", &per_ue)] {
            if samples.is_empty() {
                continue;
            }
            files.push((format!("cdf_{metric}_{tag}.csv"), cdf_csv(samples)));
            rows.push(SummaryRow {
                scheme: scheme.clone(),
                metric,
                count: samples.len(),
                likely_90: likely_value(samples, 0.10).unwrap(),
                likely_95: likely_value(samples, 0.05).unwrap(),
                median: likely_value(samples, 0.5).unwrap(),
            });
        }
    }
    Ok((rows, files))
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("scheme,metric,count,likely_90,likely_95,median\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scheme, r.metric, r.count, r.likely_90, r.likely_95, r.median
        )
        .unwrap();
    }
    out
}

pub fn run_cdf(args: &CdfArgs) -> CliResult<Vec<SummaryRow>> {
    let path = args
        .manifest
        .clone()
        .unwrap_or_else(|| args.out.join("manifest.json"));
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(CliError::Usage)?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(CliError::Usage)?;
    let (rows, files) = summarize(&manifest).map_err(CliError::Usage)?;
    let write = || -> anyhow::Result<()> {
        fs::create_dir_all(&args.out)?;
        for (name, body) in &files {
            fs::write(args.out.join(name), body)?;
        }
        fs::write(args.out.join("cdf_summary.csv"), summary_csv(&rows))?;
        Ok(())
    };
    write().map_err(CliError::Failure)?;
    Ok(rows)
}
