//! Small numeric helpers: log-space normalization, categorical draws,
//! quantiles and normal-approximation intervals.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Exp-normalizes log weights in place via max-subtraction.
/// Returns `None` when every weight is −∞ (or the input is empty).
pub fn normalize_log_weights(log_weights: &[f64]) -> Option<Vec<f64>> {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut out: Vec<f64> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    Some(out)
}

/// Index sampled proportionally to non-negative `weights` summing to `total`.
#[inline]
pub fn sample_weighted<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if target < acc {
                return i;
            }
        }
    }
    // rounding left `target` just past the final partial sum
    last_positive
}

/// First index of the largest value.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Linear-interpolation quantile of an ascending-sorted slice.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Two-sided standard-normal critical value for a central `level`.
pub fn normal_critical(level: f64) -> f64 {
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    std.inverse_cdf(0.5 + level / 2.0)
}

/// Normal-approximation interval for a frequency from `n` draws, clamped
/// to [0, 1]. Degenerate frequencies give zero width.
pub fn proportion_interval(freq: f64, n: usize, z: f64) -> (f64, f64) {
    let half = z * (freq * (1.0 - freq) / n as f64).sqrt();
    ((freq - half).max(0.0), (freq + half).min(1.0))
}
