//! Two samplers of the ensemble: Metropolis on the eigenvalue density (the
//! log-gas) and the physical construction from a Haar-random orthogonal
//! matrix. Plus the entropy and capacity of a sampled spectrum.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_forms::{mean_entropy, variance_entropy, Status};
use crate::jacobi::EnsembleParams;
use crate::observables::{capacity_term, v};
use crate::stats::{summarize, StatSummary, StatsError, DEFAULT_BATCHES};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),
    #[error("spectrum value {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("expected {expected} spectrum values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("sampler integrity check failed: {0}")]
    Integrity(String),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// One draw of the `m` spectrum parameters, sorted in decreasing order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self, SamplingError> {
        if let Some(&bad) = values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(SamplingError::OutOfRange(bad));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `S = -Σ v(x_i)`, in `[0, m ln 2]`.
pub fn entropy_of(s: &Spectrum) -> f64 {
    -s.values.iter().map(|&x| v(x)).sum::<f64>()
}

/// `C = Σ (1-x²)/4 ln²((1+x)/(1-x))`.
pub fn capacity_of(s: &Spectrum) -> f64 {
    s.values.iter().map(|&x| capacity_term(x)).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub seed: u64,
    /// Sweeps discarded before the first sample.
    pub burn_in: usize,
    /// Sweeps between retained samples.
    pub thinning: usize,
    pub proposal_width: f64,
    pub chains: usize,
    /// Adapt the proposal width towards 30–40% acceptance during burn-in.
    pub tune: bool,
}

impl ChainConfig {
    /// Width `0.5/√(m+n)`, 2000 burn-in sweeps, 8 chains.
    pub fn for_params(e: &EnsembleParams, seed: u64) -> Self {
        Self {
            seed,
            burn_in: 2000,
            thinning: 10,
            proposal_width: 0.5 / ((e.m() + e.n()) as f64).sqrt(),
            chains: 8,
            tune: true,
        }
    }

    pub fn validate(&self) -> Result<(), SamplingError> {
        if self.thinning < 1 {
            return Err(SamplingError::InvalidConfig("thinning must be at least 1".into()));
        }
        if !(self.proposal_width > 0.0 && self.proposal_width <= 1.0) {
            return Err(SamplingError::InvalidConfig(format!(
                "proposal width must lie in (0, 1], got {}",
                self.proposal_width
            )));
        }
        if self.chains < 1 {
            return Err(SamplingError::InvalidConfig("need at least one chain".into()));
        }
        Ok(())
    }
}

/// `ln Π_{i<j} (x_i² - x_j²)² Π (1 - x_i²)^a`.
pub fn log_density(x: &[f64], a: u32) -> f64 {
    let mut total = 0.0;
    for i in 0..x.len() {
        total += a as f64 * one_minus_square(x[i]).ln();
        for j in 0..i {
            total += 2.0 * (x[i] * x[i] - x[j] * x[j]).abs().ln();
        }
    }
    total
}

fn one_minus_square(x: f64) -> f64 {
    (1.0 - x) * (1.0 + x)
}

/// Change of the log-density when coordinate `i` moves to `y`; `O(m)`.
pub fn log_density_change(x: &[f64], a: u32, i: usize, y: f64) -> f64 {
    let xi2 = x[i] * x[i];
    let y2 = y * y;
    let mut delta = 0.0;
    if a > 0 {
        delta += a as f64 * (one_minus_square(y).ln() - one_minus_square(x[i]).ln());
    }
    for (j, &xj) in x.iter().enumerate() {
        if j != i {
            let xj2 = xj * xj;
            delta += 2.0 * ((y2 - xj2).abs().ln() - (xi2 - xj2).abs().ln());
        }
    }
    delta
}

/// Log of the Metropolis acceptance probability for moving coordinate `i`
/// to `y`.
pub fn log_acceptance(x: &[f64], a: u32, i: usize, y: f64) -> f64 {
    let delta = log_density_change(x, a, i, y);
    if delta.is_nan() {
        f64::NEG_INFINITY
    } else {
        delta.min(0.0)
    }
}

/// Folds `y` back into `[0, 1]` by reflection at both ends.
pub fn reflect(mut y: f64) -> f64 {
    loop {
        if y < 0.0 {
            y = -y;
        } else if y > 1.0 {
            y = 2.0 - y;
        } else {
            return y;
        }
    }
}

/// One Metropolis sweep over all coordinates, in place; returns the number of
/// accepted moves. The reflected uniform proposal is symmetric, so the
/// acceptance probability is the density ratio.
pub fn loggas_step<R: Rng + ?Sized>(state: &mut [f64], e: &EnsembleParams, width: f64, rng: &mut R) -> usize {
    let a = e.a();
    let mut accepted = 0;
    for i in 0..state.len() {
        let y = reflect(state[i] + rng.random_range(-width..width));
        let log_alpha = log_acceptance(state, a, i, y);
        // a coincident pair or y = 1 with a > 0 gives -∞ and is never accepted
        if log_alpha == 0.0 || (log_alpha > f64::NEG_INFINITY && rng.random::<f64>().ln() < log_alpha) {
            state[i] = y;
            accepted += 1;
        }
    }
    accepted
}

fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// Samples from the log-gas sampler with the per-chain acceptance rates.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGasRun {
    pub samples: Vec<Spectrum>,
    pub acceptance_rate: f64,
    /// Proposal width after tuning, per chain.
    pub widths: Vec<f64>,
}

fn run_chain(e: &EnsembleParams, cfg: &ChainConfig, chain: usize, count: usize) -> (Vec<Spectrum>, usize, usize, f64) {
    let mut rng = chain_rng(cfg.seed, chain);
    let m = e.m() as usize;
    // distinct starting points spread over (0, 1)
    let mut state: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
    let mut width = cfg.proposal_width;
    let tune_rounds = if cfg.tune { cfg.burn_in / 100 } else { 0 };
    for _ in 0..tune_rounds {
        let mut acc = 0;
        for _ in 0..100 {
            acc += loggas_step(&mut state, e, width, &mut rng);
        }
        let rate = acc as f64 / (100 * m) as f64;
        if rate < 0.30 {
            width *= 0.8;
        } else if rate > 0.40 {
            width = (width * 1.25).min(1.0);
        }
    }
    for _ in tune_rounds * 100..cfg.burn_in {
        loggas_step(&mut state, e, width, &mut rng);
    }
    let mut samples = Vec::with_capacity(count);
    let (mut accepted, mut proposed) = (0, 0);
    for _ in 0..count {
        for _ in 0..cfg.thinning {
            accepted += loggas_step(&mut state, e, width, &mut rng);
            proposed += m;
        }
        samples.push(Spectrum::new(state.clone()).expect("reflection keeps values in [0, 1]"));
    }
    (samples, accepted, proposed, width)
}

/// `count` thinned samples, split evenly over the chains (which run in
/// parallel) and concatenated in chain order; the output depends only on the
/// configuration, not on the number of worker threads.
pub fn sample_loggas(e: &EnsembleParams, cfg: &ChainConfig, count: usize) -> Result<LogGasRun, SamplingError> {
    cfg.validate()?;
    let per_chain = count.div_ceil(cfg.chains);
    let runs: Vec<_> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(e, cfg, c, per_chain))
        .collect();
    let mut samples = Vec::with_capacity(per_chain * cfg.chains);
    let (mut accepted, mut proposed) = (0usize, 0usize);
    let mut widths = Vec::with_capacity(cfg.chains);
    for (s, acc, prop, w) in runs {
        samples.extend(s);
        accepted += acc;
        proposed += prop;
        widths.push(w);
    }
    samples.truncate(count);
    Ok(LogGasRun { samples, acceptance_rate: accepted as f64 / proposed.max(1) as f64, widths })
}

/// Haar-random orthogonal matrix: QR of a Gaussian matrix with the columns of
/// `Q` multiplied by the signs of `diag(R)`.
pub fn haar_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Subsystem block `Ω_A` (top-left `2m × 2m`) of `Ω = O Ω₀ Oᵀ`, where `Ω₀` is
/// block diagonal in `[[0, 1], [-1, 0]]` and `O` is Haar on `O(2(m+n))`.
pub fn covariance_block<R: Rng + ?Sized>(e: &EnsembleParams, rng: &mut R) -> DMatrix<f64> {
    let dim = 2 * (e.m() + e.n()) as usize;
    let o = haar_orthogonal(dim, rng);
    let mut omega0 = DMatrix::zeros(dim, dim);
    for b in 0..dim / 2 {
        omega0[(2 * b, 2 * b + 1)] = 1.0;
        omega0[(2 * b + 1, 2 * b)] = -1.0;
    }
    let full = &o * omega0 * o.transpose();
    let k = 2 * e.m() as usize;
    full.view((0, 0), (k, k)).into_owned()
}

const PAIR_TOL: f64 = 1e-8;
const RANGE_TOL: f64 = 1e-10;

/// Spectrum parameters from an antisymmetric `Ω_A`: its singular values come
/// in equal pairs `x_i, x_i`.
pub fn spectrum_from_block(block: &DMatrix<f64>) -> Result<Spectrum, SamplingError> {
    let mut sv: Vec<f64> = block.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let mut values = Vec::with_capacity(sv.len() / 2);
    for pair in sv.chunks(2) {
        if pair.len() != 2 || (pair[0] - pair[1]).abs() > PAIR_TOL {
            return Err(SamplingError::Integrity(format!("unpaired singular values {pair:?}")));
        }
        let x = pair[0];
        if !(-RANGE_TOL..=1.0 + RANGE_TOL).contains(&x) {
            return Err(SamplingError::Integrity(format!("singular value {x} outside [0, 1]")));
        }
        values.push(x.clamp(0.0, 1.0));
    }
    Spectrum::new(values)
}

/// One spectrum from the physical construction.
pub fn sample_physical<R: Rng + ?Sized>(e: &EnsembleParams, rng: &mut R) -> Result<Spectrum, SamplingError> {
    spectrum_from_block(&covariance_block(e, rng))
}

/// `count` physical samples, generated in parallel blocks with per-block
/// streams; deterministic given `seed`.
pub fn sample_physical_many(e: &EnsembleParams, seed: u64, count: usize) -> Result<Vec<Spectrum>, SamplingError> {
    const BLOCK: usize = 1024;
    let blocks = count.div_ceil(BLOCK);
    let parts: Result<Vec<Vec<Spectrum>>, SamplingError> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = chain_rng(seed, b);
            let n = BLOCK.min(count - b * BLOCK);
            (0..n).map(|_| sample_physical(e, &mut rng)).collect()
        })
        .collect();
    Ok(parts?.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Statistic {
    Entropy,
    Capacity,
    /// `X = (S - E[S]) / √V[S]` with closed-form moments.
    StandardizedEntropy,
}

/// Centre and scale for standardizing the entropy; the variance is the
/// conjectured formula when `m ≠ n`.
pub fn standardization(e: &EnsembleParams) -> (f64, f64, Status) {
    let (var, status) = variance_entropy(e);
    (mean_entropy(e).evaluate(), var.evaluate().sqrt(), status)
}

/// Per-sample values of `statistic`.
pub fn statistic_values(e: &EnsembleParams, samples: &[Spectrum], statistic: Statistic) -> Vec<f64> {
    match statistic {
        Statistic::Entropy => samples.iter().map(entropy_of).collect(),
        Statistic::Capacity => samples.iter().map(capacity_of).collect(),
        Statistic::StandardizedEntropy => {
            let (mu, sd, _) = standardization(e);
            samples.iter().map(|s| (entropy_of(s) - mu) / sd).collect()
        }
    }
}

/// Log-gas estimate of `statistic` from `count` samples.
pub fn estimate(
    e: &EnsembleParams,
    cfg: &ChainConfig,
    statistic: Statistic,
    count: usize,
) -> Result<StatSummary, SamplingError> {
    let run = sample_loggas(e, cfg, count)?;
    let values = statistic_values(e, &run.samples, statistic);
    let mut summary = summarize(&values, DEFAULT_BATCHES)?;
    summary.acceptance_rate = Some(run.acceptance_rate);
    Ok(summary)
}
