//! Small numerical helpers shared across the crate: stable log-sum-exp,
//! percentiles, summary rows, and seed derivation.

use serde::{Deserialize, Serialize};

/// Log of the sum of exponentials, shifted by the maximum for stability.
///
/// Returns `-inf` for an empty slice or when every entry is `-inf`.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Two-argument log-sum-exp, used for running accumulation.
pub fn logsumexp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Interpolated percentile (the full-sort definition): for probability `p`
/// the value at fractional rank `p * (n - 1)` of the sorted sample.
///
/// Panics on an empty slice.
pub fn percentile(samples: &[f64], p: f64) -> f64 {
    assert!(!samples.is_empty(), "percentile of empty sample");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
    percentile_sorted(&sorted, p)
}

/// Percentile on an already-sorted slice.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let rank = p.clamp(0.0, 1.0) * (n - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Median plus asymmetric 68% error bars, the convention used for all
/// reported parameter estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    /// 50th percentile.
    pub median: f64,
    /// 84th percentile minus the median.
    pub plus_err: f64,
    /// Median minus the 16th percentile.
    pub minus_err: f64,
    /// 16th percentile (lower 68% endpoint).
    pub lo68: f64,
    /// 84th percentile (upper 68% endpoint).
    pub hi68: f64,
}

impl SummaryRow {
    /// Summarize a sample by median and 16/84 percentiles.
    ///
    /// Panics on an empty sample.
    pub fn from_samples(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-finite sample"));
        let median = percentile_sorted(&sorted, 0.5);
        let lo68 = percentile_sorted(&sorted, 0.16);
        let hi68 = percentile_sorted(&sorted, 0.84);
        SummaryRow {
            median,
            plus_err: hi68 - median,
            minus_err: median - lo68,
            lo68,
            hi68,
        }
    }
}

/// Summary rows for the three natural batting parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mu1: SummaryRow,
    pub mu2: SummaryRow,
    #[serde(rename = "L")]
    pub transition_scale: SummaryRow,
}

/// Derive an independent stream seed from a master seed and a salt.
///
/// SplitMix64 finalizer over `master + salt`; cheap, stable across releases,
/// and good enough to decorrelate ChaCha streams keyed by the results.
pub fn derive_seed(master: u64, salt: u64) -> u64 {
    let mut z = master
        .wrapping_add(salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
