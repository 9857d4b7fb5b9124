//! Trial aggregation: medians and nearest-rank confidence bands.
//!
//! Percentile convention (fixed so cross-implementation outputs agree):
//! the p-th percentile of n sorted values is the element at 1-based rank
//! `ceil(p/100 * n)`; the median averages the two middle elements for even
//! n. Diverged trials enter as `+inf`, so medians reflect failures.

use serde::{Deserialize, Serialize};

/// Nearest-rank percentile of an unsorted sample, `p` in (0, 100].
pub fn percentile_nearest_rank(values: &[f64], p: f64) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Median with the usual mid-average for even sample sizes.
pub fn median(values: &[f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Median plus nearest-rank 5th/95th percentiles (the 90% band).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PercentileSummary {
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
}

impl PercentileSummary {
    pub fn from_values(values: &[f64]) -> Self {
        Self {
            median: median(values),
            p5: percentile_nearest_rank(values, 5.0),
            p95: percentile_nearest_rank(values, 95.0),
        }
    }
}

/// Epoch-to-eps across trials; unreachable trials count as `+inf` in the
/// order statistics and `None` in the summary fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochToEpsSummary {
    pub eps: f64,
    pub per_trial: Vec<Option<u64>>,
    pub median: Option<f64>,
    pub p5: Option<u64>,
    pub p95: Option<u64>,
    pub reached: u32,
}

impl EpochToEpsSummary {
    pub fn from_trials(eps: f64, per_trial: Vec<Option<u64>>) -> Self {
        let as_floats: Vec<f64> =
            per_trial.iter().map(|v| v.map_or(f64::INFINITY, |q| q as f64)).collect();
        let med = median(&as_floats);
        let p5 = percentile_nearest_rank(&as_floats, 5.0);
        let p95 = percentile_nearest_rank(&as_floats, 95.0);
        let reached = per_trial.iter().filter(|v| v.is_some()).count() as u32;
        Self {
            eps,
            per_trial,
            median: med.is_finite().then_some(med),
            p5: p5.is_finite().then_some(p5 as u64),
            p95: p95.is_finite().then_some(p95 as u64),
            reached,
        }
    }
}

/// Per-epoch-checkpoint aggregation of a batch of trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    /// Checkpoint epochs, `0..=max`.
    pub epochs: Vec<u64>,
    pub fgap: Vec<PercentileSummary>,
    pub dist: Vec<PercentileSummary>,
    pub epoch_to_eps: Vec<EpochToEpsSummary>,
    pub diverged_trials: u32,
    pub trials: u32,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_band_of_integer_ramp() {
        // values 1..30: median 15.5, nearest-rank band (2, 29)
        let values: Vec<f64> = (1..=30).map(|v| v as f64).collect();
        let s = PercentileSummary::from_values(&values);
        assert_eq!(s.median, 15.5);
        assert_eq!(s.p5, 2.0); // ceil(0.05 * 30) = 2
        assert_eq!(s.p95, 29.0); // ceil(0.95 * 30) = 29
        assert!(s.p5 <= s.median && s.median <= s.p95);
    }

    #[test]
    fn percentiles_against_direct_sort_oracle() {
        // direct oracle: sort and index explicitly
        let values = vec![5.0, 1.0, 4.0, 2.0, 3.0];
        let mut sorted = values.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (p, expected_rank) in [(5.0, 1), (50.0, 3), (95.0, 5), (100.0, 5)] {
            assert_eq!(percentile_nearest_rank(&values, p), sorted[expected_rank - 1]);
        }
        assert_eq!(median(&values), 3.0);
    }

    #[test]
    fn identical_trials_have_zero_width_band() {
        let values = vec![0.25; 30];
        let s = PercentileSummary::from_values(&values);
        assert_eq!((s.median, s.p5, s.p95), (0.25, 0.25, 0.25));
    }

    #[test]
    fn diverged_trials_push_median_to_infinity() {
        let mut values = vec![1.0; 10];
        values.extend(vec![f64::INFINITY; 11]);
        assert_eq!(median(&values), f64::INFINITY);
    }

    #[test]
    fn epoch_to_eps_summary_handles_unreached() {
        let s = EpochToEpsSummary::from_trials(
            0.1,
            vec![Some(3), Some(5), None, Some(4), Some(4)],
        );
        assert_eq!(s.reached, 4);
        assert_eq!(s.median, Some(4.0));
        assert_eq!(s.p5, Some(3));
        assert_eq!(s.p95, None); // rank 5 lands on the unreached trial
        let all_none = EpochToEpsSummary::from_trials(0.1, vec![None, None]);
        assert_eq!(all_none.median, None);
        assert_eq!(all_none.reached, 0);
    }
}
