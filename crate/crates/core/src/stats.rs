//! Sample statistics with batch-means error bars, and Kolmogorov–Smirnov tests.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::CompensatedSum;

/// Batches used unless the caller asks otherwise.
pub const DEFAULT_BATCHES: usize = 32;
/// Fewest batches accepted by [`summarize`].
pub const MIN_BATCHES: usize = 20;
/// Asymptotic Kolmogorov distribution quantile at the 1% level.
pub const KS_CRITICAL_1PCT: f64 = 1.628;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("{count} samples cannot fill {needed} batches")]
    InsufficientData { count: usize, needed: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub variance: f64,
    pub stderr_mean: f64,
    pub stderr_variance: f64,
    pub count: usize,
    /// Metropolis acceptance rate; absent for exact samplers.
    pub acceptance_rate: Option<f64>,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

/// Mean, unbiased variance, skewness and excess kurtosis.
pub fn moments(values: &[f64]) -> (f64, f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n;
    let (mut m2, mut m3, mut m4) = (CompensatedSum::new(), CompensatedSum::new(), CompensatedSum::new());
    for &v in values {
        let d = v - mean;
        let d2 = d * d;
        m2.add(d2);
        m3.add(d2 * d);
        m4.add(d2 * d2);
    }
    let (c2, c3, c4) = (m2.value() / n, m3.value() / n, m4.value() / n);
    let variance = if n > 1.0 { m2.value() / (n - 1.0) } else { 0.0 };
    let (skew, kurt) = if c2 > 0.0 { (c3 / c2.powf(1.5), c4 / (c2 * c2) - 3.0) } else { (0.0, 0.0) };
    (mean, variance, skew, kurt)
}

fn spread(values: &[f64]) -> f64 {
    let (_, var, _, _) = moments(values);
    (var / values.len() as f64).sqrt()
}

/// Summary of a correlated sample using `batches` contiguous batches of equal
/// size; the remainder beyond `batches · ⌊count/batches⌋` only enters the
/// point estimates.
pub fn summarize(values: &[f64], batches: usize) -> Result<StatSummary, StatsError> {
    let batches = batches.max(MIN_BATCHES);
    let size = values.len() / batches;
    if size < 2 {
        return Err(StatsError::InsufficientData { count: values.len(), needed: 2 * batches });
    }
    let (mean, variance, skewness, excess_kurtosis) = moments(values);
    let mut batch_means = Vec::with_capacity(batches);
    let mut batch_vars = Vec::with_capacity(batches);
    for chunk in values.chunks_exact(size).take(batches) {
        let (m, v, _, _) = moments(chunk);
        batch_means.push(m);
        batch_vars.push(v);
    }
    Ok(StatSummary {
        mean,
        variance,
        stderr_mean: spread(&batch_means),
        stderr_variance: spread(&batch_vars),
        count: values.len(),
        acceptance_rate: None,
        skewness,
        excess_kurtosis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Statistic value rejected at the 1% level.
    pub critical: f64,
    pub pass: bool,
}

/// One-sample test of `samples` against the continuous distribution `cdf`.
pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsResult {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let critical = KS_CRITICAL_1PCT / n.sqrt();
    KsResult { statistic: d, critical, pass: d < critical }
}

/// Two-sample test.
pub fn ks_two_sample(first: &[f64], second: &[f64]) -> KsResult {
    let mut a = first.to_vec();
    let mut b = second.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let critical = KS_CRITICAL_1PCT * ((na + nb) / (na * nb)).sqrt();
    KsResult { statistic: d, critical, pass: d < critical }
}
