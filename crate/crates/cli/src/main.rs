use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fermi_rmt::jacobi::EnsembleParams;
use fermi_rmt::sampling::{
    sample_loggas, sample_physical_many, standardization, statistic_values, ChainConfig, Spectrum, Statistic,
};
use fermi_rmt::stats::{summarize, DEFAULT_BATCHES};
use fermi_rmt_cli::config::parse_config;
use fermi_rmt_cli::figures::{figure1, figure2, figure3, FigureOptions};
use fermi_rmt_cli::output::{emit, fmt_float, Cell, CsvTable};
use fermi_rmt_cli::verify::{self, Suite, VerifyOptions};
use fermi_rmt_cli::{sweep, CliError, Stat};
use num_traits::ToPrimitive;

const THREADS_VAR: &str = "FERMI_RMT_THREADS";
/// Largest polygamma argument that `exact` rewrites onto elementary constants.
const REDUCE_MAX_ARG: i64 = 16;

#[derive(Parser)]
#[command(name = "fermi-rmt", version, about = "Entanglement statistics of random fermionic Gaussian states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Dims {
    /// Subsystem dimension m.
    #[arg(long)]
    m: u32,
    /// Complementary dimension n >= m.
    #[arg(long)]
    n: u32,
}

impl Dims {
    fn params(&self) -> Result<EnsembleParams, CliError> {
        Ok(EnsembleParams::new(self.m, self.n)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SampleStat {
    Entropy,
    Capacity,
    StandardizedEntropy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampler {
    Loggas,
    Physical,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Closed form as exact rational coefficients of the digamma/trigamma basis.
    Exact {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        stat: Stat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Kernel quadrature.
    Quad {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        stat: Stat,
        /// Target absolute error.
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-sum route.
    Sums {
        #[command(flatten)]
        dims: Dims,
        #[arg(long)]
        stat: Stat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate; `--out` also writes every sampled spectrum.
    Sample {
        #[command(flatten)]
        dims: Dims,
        #[arg(long, value_enum, default_value = "entropy")]
        stat: SampleStat,
        #[arg(long, value_enum, default_value = "loggas")]
        sampler: Sampler,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long)]
        thinning: Option<usize>,
        #[arg(long)]
        chains: Option<usize>,
        /// Proposal half-width; tuning is disabled when given.
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites and print a JSON report.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 5)]
        max_m: u32,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tolerance for the deterministic suites.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data behind a figure as CSV.
    Figure {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        which: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 12)]
        m_max: u32,
        #[arg(long, default_value_t = 16)]
        m: u32,
        #[arg(long, default_value_t = 32)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        a: u32,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
        #[arg(long, default_value_t = 40)]
        bins: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a grid described by a config file.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the tolerance in the config file.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// `key: value` lines.
#[derive(Default)]
struct Record(String);

impl Record {
    fn field(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.0.push_str(&format!("{key}: {value}\n"));
        self
    }

    fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.field(key, fmt_float(value))
    }

    fn header(&mut self, e: &EnsembleParams, stat: Stat) -> &mut Self {
        self.field("statistic", stat).field("m", e.m()).field("n", e.n()).field("a", e.a())
    }
}

fn check_tol(tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::Invalid(format!("--tol must be positive and finite, got {tol}")))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Exact { dims, stat, out } => {
            let e = dims.params()?;
            let (value, status) = sweep::exact(&e, stat)?;
            let mut r = Record::default();
            r.header(&e, stat).field("status", status).field("form", &value);
            // rewrite small polygamma arguments onto γ, π², ln 2 and rationals
            let reduced = value.expand_exact(REDUCE_MAX_ARG);
            let float = match reduced.as_rational() {
                Some(q) => q.to_f64().unwrap_or(f64::NAN),
                None => value.evaluate(),
            };
            if reduced != value {
                r.field("reduced", &reduced);
            }
            r.float("value", float);
            emit(out.as_deref(), &r.0)
        }
        Command::Quad { dims, stat, tol, out } => {
            let e = dims.params()?;
            let q = sweep::quadrature(&e, stat, check_tol(tol)?)?;
            let mut r = Record::default();
            r.header(&e, stat)
                .float("value", q.value)
                .float("err_estimate", q.err_estimate)
                .field("nodes", q.nodes_used)
                .field("tol", format!("{tol:e}"));
            emit(out.as_deref(), &r.0)
        }
        Command::Sums { dims, stat, out } => {
            let e = dims.params()?;
            let value = sweep::sums(&e, stat).ok_or_else(|| {
                CliError::Invalid("the mean entropy has no separate summation route; use `exact`".into())
            })?;
            let a = fermi_rmt::appendix_sums::assemble(&e);
            let mut r = Record::default();
            r.header(&e, stat)
                .float("value", value)
                .field("terms_evaluated", a.terms_evaluated)
                .field("indeterminacies_resolved", a.indeterminacies_resolved);
            emit(out.as_deref(), &r.0)
        }
        Command::Sample { dims, stat, sampler, seed, samples, burn_in, thinning, chains, width, out } => {
            let e = dims.params()?;
            let statistic = match stat {
                SampleStat::Entropy => Statistic::Entropy,
                SampleStat::Capacity => Statistic::Capacity,
                SampleStat::StandardizedEntropy => Statistic::StandardizedEntropy,
            };
            let mut cfg = ChainConfig::for_params(&e, seed);
            cfg.burn_in = burn_in.unwrap_or(cfg.burn_in);
            cfg.thinning = thinning.unwrap_or(cfg.thinning);
            cfg.chains = chains.unwrap_or(cfg.chains);
            if let Some(w) = width {
                cfg.proposal_width = w;
                cfg.tune = false;
            }
            let invalid = |err: fermi_rmt::sampling::SamplingError| CliError::Invalid(err.to_string());
            let (spectra, acceptance): (Vec<Spectrum>, Option<f64>) = match sampler {
                Sampler::Loggas => {
                    let run = sample_loggas(&e, &cfg, samples).map_err(invalid)?;
                    (run.samples, Some(run.acceptance_rate))
                }
                Sampler::Physical => (sample_physical_many(&e, seed, samples).map_err(invalid)?, None),
            };
            let values = statistic_values(&e, &spectra, statistic);
            let mut s = summarize(&values, DEFAULT_BATCHES).map_err(|err| CliError::Invalid(err.to_string()))?;
            s.acceptance_rate = acceptance;
            let mut r = Record::default();
            r.field("m", e.m()).field("n", e.n()).field("seed", seed).field("count", s.count);
            r.float("mean", s.mean).float("stderr_mean", s.stderr_mean);
            r.float("variance", s.variance).float("stderr_variance", s.stderr_variance);
            r.float("skewness", s.skewness).float("excess_kurtosis", s.excess_kurtosis);
            if let Some(rate) = s.acceptance_rate {
                r.float("acceptance_rate", rate);
            }
            if matches!(stat, SampleStat::StandardizedEntropy) {
                r.field("standardization_variance", standardization(&e).2);
            }
            emit(None, &r.0)?;
            if let Some(path) = out {
                let mut header: Vec<String> = vec!["sample".into()];
                header.extend((1..=e.m()).map(|i| format!("x{i}")));
                header.push("value".into());
                let refs: Vec<&str> = header.iter().map(String::as_str).collect();
                let mut table = CsvTable::new(&refs, seed);
                table.meta("m", e.m()).meta("n", e.n()).meta("samples", samples);
                for (i, (sp, v)) in spectra.iter().zip(&values).enumerate() {
                    let mut row: Vec<Cell> = vec![i.into()];
                    row.extend(sp.values().iter().map(|&x| Cell::from(x)));
                    row.push((*v).into());
                    table.push(row);
                }
                emit(Some(&path), &table.render())?;
            }
            Ok(())
        }
        Command::Verify { suite, trials, max_m, samples, seed, tol, out } => {
            let tol = tol.map(|t| if t == 0.0 { Ok(0.0) } else { check_tol(t) }).transpose()?;
            let opts = VerifyOptions { trials, max_m, samples, seed, tol };
            let report = verify::run(suite, &opts)?;
            let text = serde_json::to_string_pretty(&report).expect("report serialises") + "\n";
            emit(out.as_deref(), &text)?;
            let failed: Vec<&str> = report.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Verification(failed.join(", ")))
            }
        }
        Command::Figure { which, seed, samples, m_max, m, n, a, n_max, bins, out } => {
            let default_samples = if which == 2 { 100_000 } else { 20_000 };
            let opts =
                FigureOptions { seed, samples: samples.unwrap_or(default_samples), m_max, m, n, a, n_max, bins };
            let table = match which {
                1 => figure1(&opts)?,
                2 => figure2(&opts)?,
                _ => figure3(&opts)?,
            };
            emit(out.as_deref(), &table.render())
        }
        Command::Sweep { config, format, seed, tol, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|source| CliError::Io { path: config.display().to_string(), source })?;
            let mut cfg = parse_config(&text)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.tol = check_tol(t)?;
            }
            let rows = sweep::run_sweep(&cfg)?;
            let rendered = match format {
                Format::Csv => sweep::sweep_csv(&cfg, &rows).render(),
                Format::Json => {
                    serde_json::to_string_pretty(&sweep::sweep_json(&cfg, &rows)).expect("rows serialise") + "\n"
                }
            };
            emit(out.as_deref(), &rendered)
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::Invalid(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|err| CliError::Invalid(format!("cannot start {threads} workers: {err}")))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
