//! Output files: `summary.json`, `samples.csv` and `cdf.csv` per campaign,
//! plus `comparison.json` for paired runs.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::campaign::{Campaign, Comparison, ComparisonSummary};
use super::config::{Mode, Scenario, SimConfig};
use super::metrics::{empirical_cdf, RateMetrics};
use crate::error::Result;

pub const BUILD_TAG: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// The only field that differs between otherwise identical runs.
pub const TIMESTAMP_FIELD: &str = "created_at";

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    build: &'static str,
    created_at: u64,
    scenario: Scenario,
    mode: Mode,
    seed: u64,
    n_drops: usize,
    mean_fqam_transmitters: f64,
    metrics: &'a RateMetrics,
    config: &'a SimConfig,
}

#[derive(Debug, Serialize)]
struct ComparisonFile<'a> {
    build: &'static str,
    created_at: u64,
    scenario: Scenario,
    seed: u64,
    n_drops: usize,
    delta: ComparisonSummary,
    all_qam: &'a RateMetrics,
    hybrid: &'a RateMetrics,
}

/// Write one campaign into `dir`, creating it if needed.
pub fn write_campaign(dir: &Path, campaign: &Campaign, config: &SimConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    let summary = Summary {
        build: BUILD_TAG,
        created_at: now(),
        scenario: campaign.scenario,
        mode: campaign.mode,
        seed: campaign.seed,
        n_drops: campaign.drops.len(),
        mean_fqam_transmitters: campaign.mean_fqam_transmitters(),
        metrics: &campaign.metrics,
        config,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;

    let mut w = csv::Writer::from_path(dir.join("samples.csv"))?;
    for u in campaign.users() {
        w.serialize(u)?;
    }
    w.flush()?;

    let mut w = csv::Writer::from_path(dir.join("cdf.csv"))?;
    w.write_record(["rate_bps", "cumulative_fraction"])?;
    for (x, f) in empirical_cdf(&campaign.rates()) {
        w.write_record([x.to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Write `all_qam/`, `hybrid/` and `comparison.json` under `dir`.
pub fn write_comparison(dir: &Path, cmp: &Comparison, config: &SimConfig) -> Result<()> {
    write_campaign(&dir.join("all_qam"), &cmp.all_qam, config)?;
    write_campaign(&dir.join("hybrid"), &cmp.hybrid, config)?;
    let file = ComparisonFile {
        build: BUILD_TAG,
        created_at: now(),
        scenario: cmp.hybrid.scenario,
        seed: cmp.hybrid.seed,
        n_drops: cmp.hybrid.drops.len(),
        delta: cmp.summary(),
        all_qam: &cmp.all_qam.metrics,
        hybrid: &cmp.hybrid.metrics,
    };
    fs::write(dir.join("comparison.json"), serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}
