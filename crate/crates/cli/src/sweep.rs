//! Evaluation of one statistic by one route, and batch sweeps over a grid.

use fermi_rmt::appendix_sums::assemble;
use fermi_rmt::closed_forms::{mean_capacity_for, mean_entropy, variance_entropy, Status};
use fermi_rmt::jacobi::EnsembleParams;
use fermi_rmt::quadrature::{
    capacity_quad, mean_entropy_quad, variance_quad, QuadratureConfig, QuadratureError, QuadratureResult,
};
use fermi_rmt::sampling::{estimate, ChainConfig, Statistic};
use fermi_rmt::special::ClosedFormValue;
use fermi_rmt::stats::StatSummary;
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Route, SweepConfig};
use crate::output::{Cell, CsvTable};
use crate::{CliError, Stat};

/// Closed form and whether it is proven; capacity needs `a ≤ 3`.
pub fn exact(e: &EnsembleParams, stat: Stat) -> Result<(ClosedFormValue, Status), CliError> {
    Ok(match stat {
        Stat::MeanEntropy => (mean_entropy(e), Status::Proven),
        Stat::VarianceEntropy => variance_entropy(e),
        Stat::MeanCapacity => (mean_capacity_for(e)?, Status::Proven),
    })
}

pub fn quadrature(e: &EnsembleParams, stat: Stat, tol: f64) -> Result<QuadratureResult, CliError> {
    let cfg = QuadratureConfig::with_tolerance(tol);
    let result = match stat {
        Stat::MeanEntropy => mean_entropy_quad(e, &cfg),
        Stat::VarianceEntropy => variance_quad(e, &cfg),
        Stat::MeanCapacity => capacity_quad(e, &cfg),
    };
    result.map_err(|err| match err {
        QuadratureError::InvalidConfig(msg) => CliError::Invalid(msg),
        failure => CliError::Verification(failure.to_string()),
    })
}

/// Summation route; the mean entropy has no separate sum representation.
pub fn sums(e: &EnsembleParams, stat: Stat) -> Option<f64> {
    match stat {
        Stat::MeanEntropy => None,
        Stat::VarianceEntropy => Some(assemble(e).variance),
        Stat::MeanCapacity => Some(assemble(e).capacity),
    }
}

/// Log-gas estimate and its standard error.
pub fn monte_carlo(e: &EnsembleParams, stat: Stat, samples: usize, seed: u64) -> Result<(f64, f64), CliError> {
    let cfg = ChainConfig::for_params(e, seed);
    let statistic = match stat {
        Stat::MeanCapacity => Statistic::Capacity,
        _ => Statistic::Entropy,
    };
    let s: StatSummary = estimate(e, &cfg, statistic, samples).map_err(|err| CliError::Invalid(err.to_string()))?;
    Ok(match stat {
        Stat::VarianceEntropy => (s.variance, s.stderr_variance),
        _ => (s.mean, s.stderr_mean),
    })
}

/// One sweep row.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub e: EnsembleParams,
    pub stat: Stat,
    /// `proven`, `conjecture` or `unsupported`.
    pub status: &'static str,
    pub exact: Option<f64>,
    pub quadrature: Option<f64>,
    pub sums: Option<f64>,
    pub mc: Option<(f64, f64)>,
}

impl SweepRow {
    /// Largest disagreement between the deterministic routes.
    pub fn max_delta(&self) -> Option<f64> {
        let vals: Vec<f64> = [self.exact, self.quadrature, self.sums].into_iter().flatten().collect();
        if vals.len() < 2 {
            return None;
        }
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(hi - lo)
    }
}

fn cell_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add(index as u64)
}

fn evaluate_row(cfg: &SweepConfig, index: usize, e: EnsembleParams, stat: Stat) -> Result<SweepRow, CliError> {
    let wants = |r: Route| cfg.routes.contains(&r);
    let mut row = SweepRow { e, stat, status: "", exact: None, quadrature: None, sums: None, mc: None };
    row.status = match exact(&e, stat) {
        Ok((v, status)) => {
            if wants(Route::Exact) {
                row.exact = Some(v.evaluate());
            }
            if status == Status::Proven {
                "proven"
            } else {
                "conjecture"
            }
        }
        Err(CliError::Unsupported(_)) => "unsupported",
        Err(other) => return Err(other),
    };
    if wants(Route::Quadrature) {
        row.quadrature = Some(quadrature(&e, stat, cfg.tol)?.value);
    }
    if wants(Route::Sums) {
        row.sums = sums(&e, stat);
    }
    if wants(Route::MonteCarlo) {
        row.mc = Some(monte_carlo(&e, stat, cfg.samples, cell_seed(cfg.seed, index))?);
    }
    Ok(row)
}

/// All rows, ordered by grid cell and then statistic whatever the worker count.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, CliError> {
    let cells = cfg.cells()?;
    let jobs: Vec<(usize, EnsembleParams, Stat)> = cells
        .iter()
        .enumerate()
        .flat_map(|(i, e)| cfg.stats.iter().map(move |s| (i, *e, *s)))
        .collect();
    jobs.into_par_iter().map(|(i, e, s)| evaluate_row(cfg, i, e, s)).collect()
}

pub const SWEEP_HEADER: [&str; 12] =
    ["m", "n", "a", "stat", "status", "exact", "quadrature", "sums", "mc", "mc_stderr", "max_delta", "agree"];

pub fn sweep_csv(cfg: &SweepConfig, rows: &[SweepRow]) -> CsvTable {
    let mut table = CsvTable::new(&SWEEP_HEADER, cfg.seed);
    table.meta("tol", format!("{:e}", cfg.tol));
    table.meta("routes", cfg.routes.iter().map(|r| r.name()).collect::<Vec<_>>().join("+"));
    if cfg.routes.contains(&Route::MonteCarlo) {
        table.meta("samples", cfg.samples);
    }
    table.meta("variance", "m != n uses the conjectured formula (status=conjecture)");
    for r in rows {
        let delta = r.max_delta();
        table.push(vec![
            r.e.m().into(),
            r.e.n().into(),
            r.e.a().into(),
            r.stat.name().into(),
            r.status.into(),
            r.exact.into(),
            r.quadrature.into(),
            r.sums.into(),
            r.mc.map(|m| m.0).into(),
            r.mc.map(|m| m.1).into(),
            delta.into(),
            delta.map_or(Cell::Empty, |d| Cell::from(if d <= cfg.tol { "true" } else { "false" })),
        ]);
    }
    table
}

pub fn sweep_json(cfg: &SweepConfig, rows: &[SweepRow]) -> serde_json::Value {
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "m": r.e.m(),
                "n": r.e.n(),
                "a": r.e.a(),
                "stat": r.stat.name(),
                "status": r.status,
                "exact": r.exact,
                "quadrature": r.quadrature,
                "sums": r.sums,
                "mc": r.mc.map(|m| m.0),
                "mc_stderr": r.mc.map(|m| m.1),
                "max_delta": r.max_delta(),
            })
        })
        .collect();
    json!({
        "meta": {
            "version": crate::VERSION,
            "seed": cfg.seed,
            "tol": cfg.tol,
            "routes": cfg.routes.iter().map(|r| r.name()).collect::<Vec<_>>(),
        },
        "rows": rows,
    })
}
