//! Multi-drop campaigns, run in parallel with order-independent results.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Mode, Scenario};
use super::drop::{DropContext, DropResult, UserRecord};
use super::metrics::{rate_metrics, RateMetrics};
use crate::error::{Result, SimError};

#[derive(Debug, Clone)]
pub struct Campaign {
    pub scenario: Scenario,
    pub mode: Mode,
    pub seed: u64,
    pub drops: Vec<DropResult>,
    pub metrics: RateMetrics,
}

impl Campaign {
    pub fn users(&self) -> impl Iterator<Item = &UserRecord> {
        self.drops.iter().flat_map(|d| d.users.iter())
    }

    pub fn rates(&self) -> Vec<f64> {
        self.users().map(|u| u.rate_bps).collect()
    }

    pub fn mean_fqam_transmitters(&self) -> f64 {
        self.drops.iter().map(|d| d.fqam_transmitters as f64).sum::<f64>() / self.drops.len() as f64
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(SimError::Usage("workers must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Usage(format!("cannot start worker pool: {e}")))
}

fn run_drops(ctx: &DropContext, mode: Mode, n_drops: u64, workers: usize) -> Result<Vec<DropResult>> {
    pool(workers)?.install(|| (0..n_drops).into_par_iter().map(|i| ctx.run(i, mode)).collect())
}

fn summarize(ctx: &DropContext, mode: Mode, drops: Vec<DropResult>) -> Campaign {
    let per_drop: Vec<Vec<f64>> = drops.iter().map(|d| d.users.iter().map(|u| u.rate_bps).collect()).collect();
    let mc = &ctx.config.mc;
    Campaign {
        scenario: ctx.config.scenario,
        mode,
        seed: mc.seed,
        metrics: rate_metrics(&per_drop, mc.bootstrap_resamples, mc.seed),
        drops,
    }
}

/// Run `n_drops` drops with `workers` threads. The output does not depend on
/// the worker count.
pub fn run_campaign(ctx: &DropContext, mode: Mode, n_drops: u64, workers: usize) -> Result<Campaign> {
    if n_drops == 0 {
        return Err(SimError::config("mc.n_drops", "must be at least 1"));
    }
    let drops = run_drops(ctx, mode, n_drops, workers)?;
    Ok(summarize(ctx, mode, drops))
}

/// Difference of one statistic between the hybrid and all-QAM runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Delta {
    pub all_qam: f64,
    pub hybrid: f64,
    pub absolute: f64,
    /// Relative to all-QAM.
    pub relative: f64,
    /// True when the two bootstrap intervals do not overlap.
    pub separated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonSummary {
    pub p5: Delta,
    pub mean: Delta,
    pub p95: Delta,
}

/// Paired all-QAM and hybrid runs over identical drops.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub all_qam: Campaign,
    pub hybrid: Campaign,
}

impl Comparison {
    pub fn summary(&self) -> ComparisonSummary {
        let (a, h) = (&self.all_qam.metrics, &self.hybrid.metrics);
        let d = |x: &super::metrics::Estimate, y: &super::metrics::Estimate| Delta {
            all_qam: x.value,
            hybrid: y.value,
            absolute: y.value - x.value,
            relative: if x.value != 0.0 { (y.value - x.value) / x.value } else { 0.0 },
            separated: !x.overlaps(y),
        };
        ComparisonSummary { p5: d(&a.p5, &h.p5), mean: d(&a.mean, &h.mean), p95: d(&a.p95, &h.p95) }
    }
}

pub fn run_comparison(ctx: &DropContext, n_drops: u64, workers: usize) -> Result<Comparison> {
    Ok(Comparison {
        all_qam: run_campaign(ctx, Mode::AllQam, n_drops, workers)?,
        hybrid: run_campaign(ctx, Mode::Hybrid, n_drops, workers)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SimConfig;

    fn ctx() -> DropContext {
        let mut c = SimConfig { n_cells: 7, ..SimConfig::default() };
        c.mc.mi_samples = 32;
        c.mc.bootstrap_resamples = 50;
        DropContext::new(c).unwrap()
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let ctx = ctx();
        let a = run_campaign(&ctx, Mode::Hybrid, 6, 1).unwrap();
        let b = run_campaign(&ctx, Mode::Hybrid, 6, 3).unwrap();
        assert_eq!(a.drops, b.drops);
        assert_eq!(a.metrics, b.metrics);
        assert!(a.drops.iter().enumerate().all(|(i, d)| d.index == i as u64));
    }

    #[test]
    fn rejects_zero_workers_and_drops() {
        let ctx = ctx();
        assert!(run_campaign(&ctx, Mode::AllQam, 2, 0).is_err());
        assert!(run_campaign(&ctx, Mode::AllQam, 0, 1).is_err());
    }

    #[test]
    fn comparison_summary_is_consistent() {
        let c = run_comparison(&ctx(), 4, 1).unwrap();
        let s = c.summary();
        assert_eq!(s.mean.all_qam, c.all_qam.metrics.mean.value);
        assert!((s.mean.absolute - (s.mean.hybrid - s.mean.all_qam)).abs() < 1e-9);
        assert_eq!(c.all_qam.mean_fqam_transmitters(), 0.0);
    }
}
