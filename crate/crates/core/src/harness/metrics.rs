//! Rate percentiles and bootstrap confidence intervals.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{substream, Stream};

/// Percentile `p` in `[0, 100]` of ascending `sorted`, interpolating linearly
/// between order statistics.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of empty sample");
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 100.0) / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Same as [`percentile`] on unsorted data, reordering it in place.
fn select_percentile(data: &mut [f64], p: f64) -> f64 {
    let h = (data.len() - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let (_, &mut a, rest) = data.select_nth_unstable_by(lo, f64::total_cmp);
    if h == lo as f64 {
        return a;
    }
    let b = rest.iter().copied().fold(f64::INFINITY, f64::min);
    a + (h - lo as f64) * (b - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    pub fn overlaps(&self, other: &Estimate) -> bool {
        self.ci_low <= other.ci_high && other.ci_low <= self.ci_high
    }
}

/// Rate statistics in bit/s with 95% bootstrap intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateMetrics {
    /// Rate reached by 95% of users (5th percentile).
    pub p5: Estimate,
    pub mean: Estimate,
    /// Rate reached by the best 5% of users (95th percentile).
    pub p95: Estimate,
    pub n_samples: usize,
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Metrics over all samples. Intervals come from a bootstrap that resamples
/// whole drops, since users of the same drop share channels and scheduling.
pub fn rate_metrics(drops: &[Vec<f64>], resamples: usize, seed: u64) -> RateMetrics {
    let mut all: Vec<f64> = drops.iter().flatten().copied().collect();
    assert!(!all.is_empty(), "no samples");
    all.sort_by(f64::total_cmp);
    let point = (percentile(&all, 5.0), mean(&all), percentile(&all, 95.0));

    let mut rng = substream(seed, Stream::Bootstrap, &[]);
    let mut stats = [Vec::with_capacity(resamples), Vec::with_capacity(resamples), Vec::with_capacity(resamples)];
    let mut buf = Vec::with_capacity(all.len());
    for _ in 0..resamples {
        buf.clear();
        for _ in 0..drops.len() {
            buf.extend_from_slice(&drops[rng.gen_range(0..drops.len())]);
        }
        if buf.is_empty() {
            continue;
        }
        stats[1].push(mean(&buf));
        stats[0].push(select_percentile(&mut buf, 5.0));
        stats[2].push(select_percentile(&mut buf, 95.0));
    }
    let interval = |s: &mut Vec<f64>, value: f64| {
        if s.is_empty() {
            return Estimate { value, ci_low: value, ci_high: value };
        }
        s.sort_by(f64::total_cmp);
        Estimate { value, ci_low: percentile(s, 2.5), ci_high: percentile(s, 97.5) }
    };
    let [s0, s1, s2] = &mut stats;
    RateMetrics {
        p5: interval(s0, point.0),
        mean: interval(s1, point.1),
        p95: interval(s2, point.2),
        n_samples: all.len(),
    }
}

/// Empirical CDF: one `(value, fraction <= value)` pair per distinct value.
pub fn empirical_cdf(values: &[f64]) -> Vec<(f64, f64)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = frac,
            _ => out.push((*x, frac)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_interpolates() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(percentile(&x, 0.0), 1.0);
        assert_eq!(percentile(&x, 100.0), 5.0);
        assert_eq!(percentile(&x, 50.0), 3.0);
        assert!((percentile(&x, 5.0) - 1.2).abs() < 1e-12);
        assert_eq!(percentile(&[7.0], 5.0), 7.0);
        for p in [0.0, 5.0, 37.5, 95.0, 100.0] {
            let mut y = vec![5.0, 1.0, 4.0, 2.0, 3.0];
            assert!((select_percentile(&mut y, p) - percentile(&x, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn cdf_merges_ties() {
        let c = empirical_cdf(&[2.0, 1.0, 2.0, 3.0]);
        assert_eq!(c, vec![(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)]);
    }

    #[test]
    fn bootstrap_brackets_point() {
        let drops: Vec<Vec<f64>> = (0..200).map(|d| (0..10).map(|u| ((d * 31 + u * 17) % 97) as f64).collect()).collect();
        let m = rate_metrics(&drops, 300, 4);
        for e in [m.p5, m.mean, m.p95] {
            assert!(e.ci_low <= e.value && e.value <= e.ci_high, "{e:?}");
        }
        assert!(m.p5.value <= m.mean.value && m.mean.value <= m.p95.value);
        assert_eq!(m.n_samples, 2000);
        assert_eq!(m, rate_metrics(&drops, 300, 4));
    }

    #[test]
    fn constant_sample_has_degenerate_interval() {
        let m = rate_metrics(&[vec![3.0; 5], vec![3.0; 5]], 50, 0);
        assert_eq!(m.p5, Estimate { value: 3.0, ci_low: 3.0, ci_high: 3.0 });
    }
}
