//! Double-exponential (tanh-sinh) quadrature on `[0, 1]` and the integral
//! representations of every ensemble statistic.
//!
//! Integrands receive `(x, 1 - x)` with both coordinates computed directly
//! from the node parameter, so logarithmic singularities at either end are
//! resolved to full relative precision and no endpoint cutoff is needed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::EnsembleParams;
use crate::kernel::KernelContext;
use crate::observables::{capacity_term_pair, log_square_term_pair, v_pair};
use crate::special::CompensatedSum;

const T_MAX: f64 = 6.5;
/// Nodes whose weight is below this are dropped from 2-D grids.
const TENSOR_WEIGHT_FLOOR: f64 = 1e-40;
const CHUNK: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error("no convergence after {levels} levels: last estimate {} with error {}", .last.value, .last.err_estimate)]
    ConvergenceFailure { levels: u32, last: QuadratureResult },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub target_abs_tol: f64,
    /// Number of step halvings after the initial unit step.
    pub max_levels: u32,
    /// Minimum nodes per axis for 2-D rules.
    pub two_d_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { target_abs_tol: 1e-12, max_levels: 10, two_d_nodes: 64 }
    }
}

impl QuadratureConfig {
    pub fn with_tolerance(target_abs_tol: f64) -> Self {
        Self { target_abs_tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if self.target_abs_tol.is_nan() || self.target_abs_tol <= 0.0 {
            return Err(QuadratureError::InvalidConfig(format!(
                "target_abs_tol must be positive, got {}",
                self.target_abs_tol
            )));
        }
        if self.max_levels < 3 {
            return Err(QuadratureError::InvalidConfig(format!(
                "max_levels must be at least 3, got {}",
                self.max_levels
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub err_estimate: f64,
    pub nodes_used: usize,
}

impl QuadratureResult {
    /// `self - other` with errors added.
    pub fn minus(&self, other: &QuadratureResult) -> QuadratureResult {
        QuadratureResult {
            value: self.value - other.value,
            err_estimate: self.err_estimate + other.err_estimate,
            nodes_used: self.nodes_used + other.nodes_used,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    x: f64,
    comp: f64,
    /// `dx/dt`; the step `h` is applied after summation.
    weight: f64,
}

fn node(t: f64) -> Node {
    let s = std::f64::consts::FRAC_PI_2 * t.sinh();
    let x = 1.0 / (1.0 + (-2.0 * s).exp());
    let comp = 1.0 / (1.0 + (2.0 * s).exp());
    Node { x, comp, weight: std::f64::consts::PI * t.cosh() * x * comp }
}

/// Nodes first used at `level`: every multiple of `h = 1` at level 0, odd
/// multiples of `h = 2^-level` afterwards. Nodes with zero weight or an
/// endpoint coordinate are dropped.
fn level_nodes(level: u32) -> Vec<Node> {
    let h = 0.5f64.powi(level as i32);
    let jmax = (T_MAX / h).floor() as i64;
    let (start, step) = if level == 0 { (-jmax, 1) } else { (-jmax | 1, 2) };
    let mut nodes = Vec::new();
    let mut j = start;
    while j <= jmax {
        let n = node(j as f64 * h);
        if n.weight > 0.0 && n.x > 0.0 && n.comp > 0.0 {
            nodes.push(n);
        }
        j += step;
    }
    nodes
}

fn step(level: u32) -> f64 {
    0.5f64.powi(level as i32)
}

/// Deterministic parallel accumulation of `Σ weight · f` for every component
/// of a vector-valued integrand, together with `Σ |weight · f|`.
fn accumulate<F>(nodes: &[Node], len: usize, f: &F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, f64, &mut [f64]) + Sync,
{
    let partials: Vec<(Vec<f64>, Vec<f64>)> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut sums = vec![CompensatedSum::new(); len];
            let mut abs = vec![0.0; len];
            let mut buf = vec![0.0; len];
            for n in chunk {
                f(n.x, n.comp, &mut buf);
                for i in 0..len {
                    let term = n.weight * buf[i];
                    sums[i].add(term);
                    abs[i] += term.abs();
                }
            }
            (sums.iter().map(CompensatedSum::value).collect(), abs)
        })
        .collect();
    let mut sums = vec![CompensatedSum::new(); len];
    let mut abs = vec![0.0; len];
    for (s, a) in partials {
        for i in 0..len {
            sums[i].add(s[i]);
            abs[i] += a[i];
        }
    }
    (sums.iter().map(CompensatedSum::value).collect(), abs)
}

/// Integrates a vector-valued integrand over `[0, 1]` and returns
/// `combine(∫f₀, …, ∫f_{len-1})`. Refinement stops once consecutive levels
/// differ by at most the tolerance and at least `min_nodes` nodes are in use.
///
/// When `combine` is a quadratic form in the moments, the result equals the
/// tensor-product rule for the corresponding separable 2-D integral.
pub fn integrate_moments<F, C>(
    len: usize,
    f: F,
    combine: C,
    min_nodes: usize,
    cfg: &QuadratureConfig,
) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64, f64, &mut [f64]) + Sync,
    C: Fn(&[f64]) -> f64,
{
    cfg.validate()?;
    let mut sums = vec![0.0; len];
    let mut abs = vec![0.0; len];
    let mut nodes_used = 0;
    let mut previous: Option<f64> = None;
    let mut last = QuadratureResult { value: f64::NAN, err_estimate: f64::INFINITY, nodes_used: 0 };
    for level in 0..=cfg.max_levels {
        let nodes = level_nodes(level);
        nodes_used += nodes.len();
        let (s, a) = accumulate(&nodes, len, &f);
        for i in 0..len {
            sums[i] += s[i];
            abs[i] += a[i];
        }
        let h = step(level);
        let moments: Vec<f64> = sums.iter().map(|v| v * h).collect();
        let value = combine(&moments);
        let floor = 16.0 * f64::EPSILON * h * abs.iter().sum::<f64>();
        let diff = previous.map_or(f64::INFINITY, |p| (value - p).abs());
        last = QuadratureResult { value, err_estimate: diff.max(floor), nodes_used };
        if level >= 2 && nodes_used >= min_nodes && last.err_estimate <= cfg.target_abs_tol {
            return Ok(last);
        }
        previous = Some(value);
    }
    Err(QuadratureError::ConvergenceFailure { levels: cfg.max_levels, last })
}

/// `∫₀¹ f(x, 1-x) dx`.
pub fn integrate_1d_pair<F>(f: F, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    integrate_moments(1, |x, c, out: &mut [f64]| out[0] = f(x, c), |m| m[0], 0, cfg)
}

/// `∫₀¹ f(x) dx`.
pub fn integrate_1d<F>(f: F, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_1d_pair(|x, _| f(x), cfg)
}

/// `∫₀¹∫₀¹ f(x, 1-x, y, 1-y) dx dy` on a full tensor grid, rebuilt at each
/// level until consecutive levels agree.
pub fn integrate_2d_pair<F>(f: F, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError>
where
    F: Fn(f64, f64, f64, f64) -> f64 + Sync,
{
    cfg.validate()?;
    let mut axis: Vec<Node> = Vec::new();
    let mut previous: Option<f64> = None;
    let mut nodes_used = 0;
    let mut last = QuadratureResult { value: f64::NAN, err_estimate: f64::INFINITY, nodes_used: 0 };
    for level in 0..=cfg.max_levels {
        axis.extend(level_nodes(level).into_iter().filter(|n| n.weight >= TENSOR_WEIGHT_FLOOR));
        let h = step(level);
        let rows: Vec<(f64, f64)> = axis
            .par_iter()
            .map(|nx| {
                let mut acc = CompensatedSum::new();
                let mut abs = 0.0;
                for ny in &axis {
                    let term = ny.weight * f(nx.x, nx.comp, ny.x, ny.comp);
                    acc.add(term);
                    abs += term.abs();
                }
                (nx.weight * acc.value(), nx.weight * abs)
            })
            .collect();
        let mut total = CompensatedSum::new();
        let mut abs = 0.0;
        for (r, a) in rows {
            total.add(r);
            abs += a;
        }
        nodes_used += axis.len() * axis.len();
        let value = total.value() * h * h;
        let floor = 16.0 * f64::EPSILON * abs * h * h;
        let diff = previous.map_or(f64::INFINITY, |p| (value - p).abs());
        last = QuadratureResult { value, err_estimate: diff.max(floor), nodes_used };
        if level >= 2 && axis.len() >= cfg.two_d_nodes && last.err_estimate <= cfg.target_abs_tol {
            return Ok(last);
        }
        previous = Some(value);
    }
    Err(QuadratureError::ConvergenceFailure { levels: cfg.max_levels, last })
}

/// `n`-point Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Tricomi's initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        out.push(((1.0 - z) / 2.0, w / 2.0));
    }
    out.reverse();
    out
}

/// `E[S] = -∫₀¹ v(x) K(x,x) dx`.
pub fn mean_entropy_quad(e: &EnsembleParams, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError> {
    let ctx = KernelContext::new(*e);
    integrate_1d_pair(|x, c| -v_pair(x, c) * ctx.diag_pair(x, c), cfg)
}

/// `I_A = ∫₀¹ v(x)² K(x,x) dx`.
pub fn ia_quad(e: &EnsembleParams, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError> {
    let ctx = KernelContext::new(*e);
    integrate_1d_pair(
        |x, c| {
            let v = v_pair(x, c);
            v * v * ctx.diag_pair(x, c)
        },
        cfg,
    )
}

/// `I_B = ∫₀¹∫₀¹ v(x) v(y) K(x,y)² dx dy` on a tensor grid.
///
/// With `K(x,y) = Σ φ_k(x) φ_k(y)` the tensor rule factorises exactly into
/// `Σ_{k,l} M_kl²`, `M_kl = Σ_i w_i v(x_i) φ_k(x_i) φ_l(x_i)`, so the grid
/// sum costs `O(N m²)` instead of `O(N² m)`.
pub fn ib_quad(e: &EnsembleParams, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError> {
    let ctx = KernelContext::new(*e);
    let m = e.m() as usize;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|k| (k..m).map(move |l| (k, l))).collect();
    integrate_moments(
        pairs.len(),
        |x, c, out: &mut [f64]| {
            let phi = ctx.basis_pair(x, c);
            let v = v_pair(x, c);
            for (slot, &(k, l)) in out.iter_mut().zip(&pairs) {
                *slot = v * phi[k] * phi[l];
            }
        },
        |moments| {
            let mut acc = CompensatedSum::new();
            for (mkl, &(k, l)) in moments.iter().zip(&pairs) {
                let factor = if k == l { 1.0 } else { 2.0 };
                acc.add(factor * mkl * mkl);
            }
            acc.value()
        },
        cfg.two_d_nodes,
        cfg,
    )
}

/// `I_C = ∫₀¹ [(1+x)/2 ln²((1+x)/2) + (1-x)/2 ln²((1-x)/2)] K(x,x) dx`.
pub fn ic_quad(e: &EnsembleParams, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError> {
    let ctx = KernelContext::new(*e);
    integrate_1d_pair(|x, c| log_square_term_pair(x, c) * ctx.diag_pair(x, c), cfg)
}

/// `V[S] = I_A - I_B`.
pub fn variance_quad(e: &EnsembleParams, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError> {
    Ok(ia_quad(e, cfg)?.minus(&ib_quad(e, cfg)?))
}

/// `E[C] = ∫₀¹ (1-x²)/4 ln²((1+x)/(1-x)) K(x,x) dx`.
pub fn capacity_quad(e: &EnsembleParams, cfg: &QuadratureConfig) -> Result<QuadratureResult, QuadratureError> {
    let ctx = KernelContext::new(*e);
    integrate_1d_pair(|x, c| capacity_term_pair(x, c) * ctx.diag_pair(x, c), cfg)
}
