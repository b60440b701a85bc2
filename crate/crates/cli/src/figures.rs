//! Data series for the three figures: entropy variance against `m`, the
//! density of the standardized entropy, and mean capacity against `n`.

use fermi_rmt::closed_forms::{mean_capacity_for, variance_entropy};
use fermi_rmt::jacobi::EnsembleParams;
use fermi_rmt::sampling::{estimate, sample_loggas, standardization, statistic_values, ChainConfig, Statistic};
use fermi_rmt::stats::moments;
use rayon::prelude::*;

use crate::output::{Cell, CsvTable};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureOptions {
    pub seed: u64,
    /// Monte Carlo samples per point; zero skips the simulation columns.
    pub samples: usize,
    pub m_max: u32,
    pub m: u32,
    pub n: u32,
    pub a: u32,
    pub n_max: u32,
    pub bins: usize,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self { seed: 0, samples: 20_000, m_max: 12, m: 16, n: 32, a: 0, n_max: 12, bins: 40 }
    }
}

fn sampling_err(err: fermi_rmt::sampling::SamplingError) -> CliError {
    CliError::Invalid(err.to_string())
}

fn mc(e: &EnsembleParams, stat: Statistic, opts: &FigureOptions, index: usize, variance: bool) -> Result<(Option<f64>, Option<f64>), CliError> {
    if opts.samples == 0 {
        return Ok((None, None));
    }
    let cfg = ChainConfig::for_params(e, opts.seed.wrapping_add(index as u64));
    let s = estimate(e, &cfg, stat, opts.samples).map_err(sampling_err)?;
    Ok(if variance {
        (Some(s.variance), Some(s.stderr_variance))
    } else {
        (Some(s.mean), Some(s.stderr_mean))
    })
}

/// Entropy variance for `n ∈ {m, 2m, 3m}`, `m = 1..=m_max`.
pub fn figure1(opts: &FigureOptions) -> Result<CsvTable, CliError> {
    if opts.m_max == 0 {
        return Err(CliError::Invalid("--m-max must be at least 1".into()));
    }
    let cells: Vec<EnsembleParams> = (1..=opts.m_max)
        .flat_map(|m| (1..=3).map(move |k| EnsembleParams::new(m, k * m)))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            let (mc_var, mc_err) = mc(e, Statistic::Entropy, opts, i, true)?;
            Ok(vec![e.m().into(), e.n().into(), variance_entropy(e).0.evaluate().into(), mc_var.into(), mc_err.into()])
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = CsvTable::new(&["m", "n", "exact_var", "mc_var", "mc_stderr"], opts.seed);
    table.meta("samples", opts.samples).meta("exact_var", "proven for n = m, conjectured formula for n != m");
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

const STANDARD_RANGE: f64 = 4.0;

/// Histogram of `X = (S - E[S]) / √V[S]` on `[-4, 4]` with the standard normal
/// density alongside.
pub fn figure2(opts: &FigureOptions) -> Result<CsvTable, CliError> {
    let e = EnsembleParams::new(opts.m, opts.n)?;
    if opts.samples < 1000 || opts.bins == 0 {
        return Err(CliError::Invalid("figure 2 needs --samples >= 1000 and --bins >= 1".into()));
    }
    let run = sample_loggas(&e, &ChainConfig::for_params(&e, opts.seed), opts.samples).map_err(sampling_err)?;
    let x = statistic_values(&e, &run.samples, Statistic::StandardizedEntropy);
    let width = 2.0 * STANDARD_RANGE / opts.bins as f64;
    let mut counts = vec![0usize; opts.bins];
    for &v in &x {
        let b = ((v + STANDARD_RANGE) / width).floor();
        if b >= 0.0 && (b as usize) < opts.bins {
            counts[b as usize] += 1;
        }
    }
    let (_, _, skew, kurt) = moments(&x);
    let (_, _, status) = standardization(&e);
    let mut table = CsvTable::new(&["bin_center", "density", "gauss_ref"], opts.seed);
    table
        .meta("m", e.m())
        .meta("n", e.n())
        .meta("samples", opts.samples)
        .meta("variance", status)
        .meta("skewness", format!("{skew:e}"))
        .meta("excess_kurtosis", format!("{kurt:e}"));
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    for (i, c) in counts.iter().enumerate() {
        let centre = -STANDARD_RANGE + (i as f64 + 0.5) * width;
        let density = *c as f64 / (x.len() as f64 * width);
        table.push(vec![centre.into(), density.into(), (norm * (-centre * centre / 2.0).exp()).into()]);
    }
    Ok(table)
}

/// Mean capacity for `n = a+1..=n_max` at fixed `a = n - m`.
pub fn figure3(opts: &FigureOptions) -> Result<CsvTable, CliError> {
    let a = opts.a;
    if opts.n_max < a + 1 {
        return Err(CliError::Invalid(format!("--n-max must be at least a + 1 = {}", a + 1)));
    }
    let cells: Vec<EnsembleParams> =
        (a + 1..=opts.n_max).map(|n| EnsembleParams::new(n - a, n)).collect::<Result<_, _>>()?;
    // an unsupported `a` fails here, before any sampling
    let exact: Vec<f64> = cells.iter().map(|e| Ok(mean_capacity_for(e)?.evaluate())).collect::<Result<_, CliError>>()?;
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .zip(exact)
        .enumerate()
        .map(|(i, (e, ex))| {
            let (mean, err) = mc(e, Statistic::Capacity, opts, i, false)?;
            Ok(vec![e.n().into(), ex.into(), mean.into(), err.into()])
        })
        .collect::<Result<_, CliError>>()?;
    let mut table = CsvTable::new(&["n", "exact_capacity", "mc_capacity", "mc_stderr"], opts.seed);
    table.meta("a", a).meta("samples", opts.samples);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}
