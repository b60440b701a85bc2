//! Verification suites behind `fermi-rmt verify`.

use fermi_rmt::appendix_sums::{assemble, identity_suite, semi_closed_a0_difference, SemiClosed};
use fermi_rmt::closed_forms::{
    mean_capacity_for, mean_entropy, variance_entropy, variance_entropy_a0, variance_entropy_conjecture,
};
use fermi_rmt::jacobi::EnsembleParams;
use fermi_rmt::kernel::KernelContext;
use fermi_rmt::quadrature::{capacity_quad, mean_entropy_quad, variance_quad, QuadratureConfig};
use fermi_rmt::sampling::{estimate, sample_loggas, sample_physical_many, ChainConfig, Spectrum, Statistic};
use fermi_rmt::stats::{ks_one_sample, ks_two_sample, KsResult};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Identities,
    Routes,
    Samplers,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub check: String,
    pub params: Value,
    pub max_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub max_m: u32,
    pub samples: usize,
    pub seed: u64,
    /// Overrides the per-suite default tolerances.
    pub tol: Option<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { trials: 1000, max_m: 5, samples: 20_000, seed: 0, tol: None }
    }
}

pub const IDENTITY_TOL: f64 = 1e-10;
pub const ROUTE_TOL: f64 = 1e-9;
/// The semi-closed difference is held to this bound unless `tol` is tighter.
pub const CANCELLATION_TOL: f64 = 1e-11;
/// Standard errors allowed between a sampled mean and its closed form.
pub const MEAN_SIGMAS: f64 = 4.0;

pub fn identities(opts: &VerifyOptions) -> Vec<VerifyEntry> {
    let tol = opts.tol.unwrap_or(IDENTITY_TOL);
    identity_suite(opts.trials.max(1), opts.seed, tol)
        .checks
        .into_iter()
        .map(|c| VerifyEntry {
            check: format!("identity/{}", c.name),
            params: json!({ "trials": c.trials, "worst": c.worst_params, "tol": tol }),
            max_error: c.max_rel_error,
            pass: c.pass,
        })
        .collect()
}

/// Running maximum of `|Δ|` with the parameters where it occurred.
struct Worst {
    check: &'static str,
    error: f64,
    at: Option<EnsembleParams>,
}

impl Worst {
    fn new(check: &'static str) -> Self {
        Self { check, error: 0.0, at: None }
    }

    fn update(&mut self, e: EnsembleParams, diff: f64) {
        // NaN counts as the worst possible error
        if diff.is_nan() || diff.abs() > self.error {
            self.error = if diff.is_nan() { f64::INFINITY } else { diff.abs() };
            self.at = Some(e);
        }
    }

    fn entry(self, tol: f64, grid: &str) -> VerifyEntry {
        VerifyEntry {
            check: self.check.to_string(),
            params: json!({ "grid": grid, "worst": self.at.map(|e| e.to_string()), "tol": tol }),
            max_error: self.error,
            pass: self.error <= tol,
        }
    }
}

pub fn routes(opts: &VerifyOptions) -> Result<Vec<VerifyEntry>, CliError> {
    let tol = opts.tol.unwrap_or(ROUTE_TOL);
    let cfg = QuadratureConfig::with_tolerance((tol / 100.0).max(1e-13));
    let quad_err = |err: fermi_rmt::quadrature::QuadratureError| CliError::Verification(err.to_string());
    let mut entropy_q = Worst::new("routes/mean-entropy/exact-vs-quadrature");
    let mut var_s = Worst::new("routes/variance-entropy/exact-vs-sums");
    let mut var_q = Worst::new("routes/variance-entropy/exact-vs-quadrature");
    let mut cap_s = Worst::new("routes/mean-capacity/exact-vs-sums");
    let mut cap_q = Worst::new("routes/mean-capacity/exact-vs-quadrature");
    for m in 1..=opts.max_m.max(1) {
        for a in 0..=3 {
            let e = EnsembleParams::with_difference(m, a)?;
            let sums = assemble(&e);
            entropy_q.update(e, mean_entropy(&e).evaluate() - mean_entropy_quad(&e, &cfg).map_err(quad_err)?.value);
            let var = variance_entropy(&e).0.evaluate();
            var_s.update(e, var - sums.variance);
            var_q.update(e, var - variance_quad(&e, &cfg).map_err(quad_err)?.value);
            let cap = mean_capacity_for(&e)?.evaluate();
            cap_s.update(e, cap - sums.capacity);
            cap_q.update(e, cap - capacity_quad(&e, &cfg).map_err(quad_err)?.value);
        }
    }
    let grid = format!("m=1..{}, a=0..3", opts.max_m.max(1));
    let mut out: Vec<VerifyEntry> =
        [entropy_q, var_s, var_q, cap_s, cap_q].into_iter().map(|w| w.entry(tol, &grid)).collect();

    let mut cancel = Worst::new("routes/basis-sum-cancellation");
    let mut reduce = Worst::new("routes/conjecture-reduces-at-m-eq-n");
    for n in 1..=50 {
        let e = EnsembleParams::new(n, n)?;
        let semi = semi_closed_a0_difference(n, SemiClosed::IA, SemiClosed::IB);
        cancel.update(e, semi - variance_entropy_a0(n).evaluate());
        let exact_match = variance_entropy_conjecture(&e) == variance_entropy_a0(n);
        reduce.update(e, if exact_match { 0.0 } else { 1.0 });
    }
    out.push(cancel.entry(tol.min(CANCELLATION_TOL), "a=0, n=1..50"));
    out.push(reduce.entry(0.0, "n=1..50, exact rational comparison"));
    Ok(out)
}

fn pooled(samples: &[Spectrum]) -> Vec<f64> {
    samples.iter().flat_map(|s| s.values().iter().copied()).collect()
}

fn ks_entry(check: &str, params: Value, ks: KsResult) -> VerifyEntry {
    let mut params = params;
    params["critical_1pct"] = json!(ks.critical);
    VerifyEntry { check: check.to_string(), params, max_error: ks.statistic, pass: ks.pass }
}

fn sampling_err(err: fermi_rmt::sampling::SamplingError) -> CliError {
    CliError::Verification(err.to_string())
}

pub fn samplers(opts: &VerifyOptions) -> Result<Vec<VerifyEntry>, CliError> {
    let count = opts.samples.max(1000);
    let mut out = Vec::new();

    let e = EnsembleParams::new(1, 2)?;
    let ctx = KernelContext::new(e);
    let cdf = |x: f64| ctx.cdf_one(x).unwrap_or(f64::NAN);
    let run = sample_loggas(&e, &ChainConfig::for_params(&e, opts.seed), count).map_err(sampling_err)?;
    out.push(ks_entry(
        "samplers/loggas-marginal",
        json!({ "m": 1, "n": 2, "samples": count, "seed": opts.seed }),
        ks_one_sample(&pooled(&run.samples), cdf),
    ));
    let phys = sample_physical_many(&e, opts.seed.wrapping_add(1), count).map_err(sampling_err)?;
    out.push(ks_entry(
        "samplers/physical-marginal",
        json!({ "m": 1, "n": 2, "samples": count, "seed": opts.seed.wrapping_add(1) }),
        ks_one_sample(&pooled(&phys), cdf),
    ));

    let e = EnsembleParams::new(2, 3)?;
    let run = sample_loggas(&e, &ChainConfig::for_params(&e, opts.seed.wrapping_add(2)), count).map_err(sampling_err)?;
    let phys = sample_physical_many(&e, opts.seed.wrapping_add(3), count).map_err(sampling_err)?;
    out.push(ks_entry(
        "samplers/loggas-vs-physical",
        json!({ "m": 2, "n": 3, "samples": count }),
        ks_two_sample(&pooled(&run.samples), &pooled(&phys)),
    ));

    let e = EnsembleParams::new(2, 2)?;
    let seed = opts.seed.wrapping_add(4);
    let s = estimate(&e, &ChainConfig::for_params(&e, seed), Statistic::Entropy, count).map_err(sampling_err)?;
    let z = (s.mean - mean_entropy(&e).evaluate()).abs() / s.stderr_mean;
    out.push(VerifyEntry {
        check: "samplers/loggas-mean-entropy".into(),
        params: json!({ "m": 2, "n": 2, "samples": count, "seed": seed, "units": "standard errors", "bound": MEAN_SIGMAS }),
        max_error: z,
        pass: z < MEAN_SIGMAS,
    });
    Ok(out)
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> Result<Vec<VerifyEntry>, CliError> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Identities | Suite::All) {
        out.extend(identities(opts));
    }
    if matches!(suite, Suite::Routes | Suite::All) {
        out.extend(routes(opts)?);
    }
    if matches!(suite, Suite::Samplers | Suite::All) {
        out.extend(samplers(opts)?);
    }
    Ok(out)
}
