//! Sweep configuration files.
//!
//! Flat `key = value` lines followed by one or more `[grid]` stanzas:
//!
//! ```text
//! # comments start with '#'
//! seed = 42
//! tol = 1e-10
//! stats = mean-entropy, variance-entropy
//! routes = exact + quadrature
//! samples = 20000
//!
//! [grid]
//! m = 1..4
//! n = m..m+3
//!
//! [grid]
//! m = 2..5
//! a = 0..3
//! ```
//!
//! Range bounds are integers or affine expressions in `m` such as `m`, `2*m`,
//! `m+3`. Cells with `n < m` are skipped.

use std::fmt;
use std::str::FromStr;

use fermi_rmt::jacobi::EnsembleParams;
use thiserror::Error;

use crate::Stat;

/// Largest `m` or `n` a sweep may name.
pub const MAX_DIMENSION: u32 = 400;
/// Largest number of grid cells in one sweep.
pub const MAX_CELLS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, field `{field}`: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, field: &str, message: impl Into<String>) -> Self {
        Self { line, field: field.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Route {
    Exact,
    Quadrature,
    Sums,
    MonteCarlo,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Exact => "exact",
            Route::Quadrature => "quadrature",
            Route::Sums => "sums",
            Route::MonteCarlo => "mc",
        }
    }
}

impl FromStr for Route {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" | "closed" => Ok(Route::Exact),
            "quadrature" | "quad" => Ok(Route::Quadrature),
            "sums" => Ok(Route::Sums),
            "mc" | "montecarlo" | "sample" => Ok(Route::MonteCarlo),
            other => Err(format!("unknown route `{other}`")),
        }
    }
}

/// `coef * m + offset`; `coef = 0` is a plain integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bound {
    pub coef: u32,
    pub offset: i64,
}

impl Bound {
    pub fn at(self, m: u32) -> i64 {
        self.coef as i64 * m as i64 + self.offset
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coef, self.offset) {
            (0, o) => write!(f, "{o}"),
            (1, 0) => write!(f, "m"),
            (c, 0) => write!(f, "{c}*m"),
            (1, o) => write!(f, "m{o:+}"),
            (c, o) => write!(f, "{c}*m{o:+}"),
        }
    }
}

/// Inclusive range `lo..hi`, or a single bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridRange {
    pub lo: Bound,
    pub hi: Bound,
}

impl GridRange {
    pub fn depends_on_m(&self) -> bool {
        self.lo.coef != 0 || self.hi.coef != 0
    }

    /// Values for a given `m`, clipped below at zero.
    pub fn values(&self, m: u32) -> impl Iterator<Item = u32> {
        let lo = self.lo.at(m).max(0);
        let hi = self.hi.at(m);
        (lo..=hi).map(|v| v as u32)
    }
}

const MAX_LITERAL: i64 = 1_000_000;

fn parse_int(s: &str) -> Result<i64, String> {
    let s = s.trim();
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("expected an integer, found `{s}`"));
    }
    match s.parse::<i64>() {
        Ok(v) if v <= MAX_LITERAL => Ok(v),
        _ => Err(format!("integer `{s}` too large")),
    }
}

/// Parses `7`, `m`, `2*m`, `m+3`, `3*m-1`.
pub fn parse_bound(s: &str) -> Result<Bound, String> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(mpos) = s.find('m') else {
        return Ok(Bound { coef: 0, offset: parse_int(&s)? });
    };
    let coef = match &s[..mpos] {
        "" => 1,
        prefix => {
            let digits = prefix
                .strip_suffix('*')
                .ok_or_else(|| format!("expected `<int>*m`, found `{s}`"))?;
            parse_int(digits)? as u32
        }
    };
    if coef == 0 {
        return Err(format!("coefficient of m must be positive in `{s}`"));
    }
    let rest = &s[mpos + 1..];
    let offset = if rest.is_empty() {
        0
    } else if let Some(r) = rest.strip_prefix('+') {
        parse_int(r)?
    } else if let Some(r) = rest.strip_prefix('-') {
        -parse_int(r)?
    } else {
        return Err(format!("unexpected `{rest}` after m"));
    };
    Ok(Bound { coef, offset })
}

/// Parses `lo..hi` (inclusive) or a single bound.
pub fn parse_range(s: &str) -> Result<GridRange, String> {
    match s.split_once("..") {
        Some((lo, hi)) => {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            Ok(GridRange { lo: parse_bound(lo)?, hi: parse_bound(hi)? })
        }
        None => {
            let b = parse_bound(s)?;
            Ok(GridRange { lo: b, hi: b })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Second {
    /// Explicit `n`.
    N(GridRange),
    /// `n = m + a`.
    A(GridRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub m: GridRange,
    pub second: Second,
    /// Line of the `[grid]` header.
    pub line: usize,
}

impl GridSpec {
    fn cells(&self, out: &mut Vec<EnsembleParams>) -> Result<(), ConfigError> {
        let too_many = || ConfigError::new(self.line, "grid", format!("more than {MAX_CELLS} cells"));
        for m in self.m.values(0) {
            if m == 0 || m > MAX_DIMENSION {
                return Err(ConfigError::new(self.line, "m", format!("m = {m} outside 1..={MAX_DIMENSION}")));
            }
            let seconds = match self.second {
                Second::N(r) | Second::A(r) => r.values(m),
            };
            for s in seconds {
                let n = match self.second {
                    Second::N(_) => s,
                    Second::A(_) => m + s,
                };
                if n < m {
                    continue;
                }
                if n > MAX_DIMENSION {
                    return Err(ConfigError::new(self.line, "n", format!("n = {n} exceeds {MAX_DIMENSION}")));
                }
                if out.len() == MAX_CELLS {
                    return Err(too_many());
                }
                out.push(EnsembleParams::new(m, n).expect("n >= m >= 1"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub seed: u64,
    pub tol: f64,
    pub stats: Vec<Stat>,
    pub routes: Vec<Route>,
    /// Monte Carlo samples per cell, for the `mc` route.
    pub samples: usize,
    pub grids: Vec<GridSpec>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            tol: 1e-10,
            stats: vec![Stat::MeanEntropy],
            routes: vec![Route::Exact],
            samples: 20_000,
            grids: Vec::new(),
        }
    }
}

impl SweepConfig {
    /// Grid cells in stanza order, duplicates kept.
    pub fn cells(&self) -> Result<Vec<EnsembleParams>, ConfigError> {
        let mut out = Vec::new();
        for g in &self.grids {
            g.cells(&mut out)?;
        }
        Ok(out)
    }
}

fn list<T: FromStr<Err = String>>(value: &str, line: usize, field: &str) -> Result<Vec<T>, ConfigError> {
    let mut out: Vec<T> = Vec::new();
    for item in value.split([',', '+']).map(str::trim) {
        if item.is_empty() {
            return Err(ConfigError::new(line, field, "empty list item"));
        }
        out.push(item.parse().map_err(|e: String| ConfigError::new(line, field, e))?);
    }
    Ok(out)
}

#[derive(Default)]
struct PartialGrid {
    line: usize,
    m: Option<GridRange>,
    n: Option<GridRange>,
    a: Option<GridRange>,
}

impl PartialGrid {
    fn finish(self) -> Result<GridSpec, ConfigError> {
        let m = self.m.ok_or_else(|| ConfigError::new(self.line, "m", "grid stanza has no `m`"))?;
        if m.depends_on_m() {
            return Err(ConfigError::new(self.line, "m", "the m range cannot refer to m"));
        }
        let second = match (self.n, self.a) {
            (Some(n), None) => Second::N(n),
            (None, Some(a)) => Second::A(a),
            (None, None) => return Err(ConfigError::new(self.line, "n", "grid stanza needs `n` or `a`")),
            (Some(_), Some(_)) => return Err(ConfigError::new(self.line, "a", "give either `n` or `a`, not both")),
        };
        Ok(GridSpec { m, second, line: self.line })
    }
}

pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    let mut cfg = SweepConfig::default();
    let mut grid: Option<PartialGrid> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if content != "[grid]" {
                return Err(ConfigError::new(line, content, "unknown section; only [grid] is allowed"));
            }
            if let Some(g) = grid.take() {
                cfg.grids.push(g.finish()?);
            }
            grid = Some(PartialGrid { line, ..Default::default() });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::new(line, content, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::new(line, "key", "missing key before `=`"));
        }
        let range = |field: &str| parse_range(value).map_err(|e| ConfigError::new(line, field, e));
        match (&mut grid, key) {
            (Some(g), "m" | "n" | "a") => {
                let slot = match key {
                    "m" => &mut g.m,
                    "n" => &mut g.n,
                    _ => &mut g.a,
                };
                if slot.is_some() {
                    return Err(ConfigError::new(line, key, "duplicate key"));
                }
                *slot = Some(range(key)?);
            }
            (Some(_), other) => return Err(ConfigError::new(line, other, "unknown grid key")),
            (None, "seed") => {
                cfg.seed = value.parse().map_err(|_| ConfigError::new(line, key, "expected an unsigned integer"))?;
            }
            (None, "tol") => {
                let tol: f64 = value.parse().map_err(|_| ConfigError::new(line, key, "expected a number"))?;
                if !(tol.is_finite() && tol > 0.0) {
                    return Err(ConfigError::new(line, key, "tolerance must be positive and finite"));
                }
                cfg.tol = tol;
            }
            (None, "stats" | "stat") => cfg.stats = list(value, line, key)?,
            (None, "routes" | "route") => cfg.routes = list(value, line, key)?,
            (None, "samples") => {
                cfg.samples = value.parse().map_err(|_| ConfigError::new(line, key, "expected a sample count"))?;
            }
            (None, other) => return Err(ConfigError::new(line, other, "unknown key")),
        }
    }
    if let Some(g) = grid.take() {
        cfg.grids.push(g.finish()?);
    }
    cfg.stats.sort();
    cfg.stats.dedup();
    cfg.routes.sort();
    cfg.routes.dedup();
    if cfg.cells()?.is_empty() {
        return Err(ConfigError::new(last_line, "grid", "the grid has no cells"));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
seed = 42
tol = 1e-9   # loose
stats = variance-entropy
routes = exact + quadrature

[grid]
m = 1..4
n = m..m+3
";

    #[test]
    fn parses_the_sample() {
        let cfg = parse_config(SAMPLE).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.stats, vec![Stat::VarianceEntropy]);
        assert_eq!(cfg.routes, vec![Route::Exact, Route::Quadrature]);
        let cells = cfg.cells().unwrap();
        assert_eq!(cells.len(), 16);
        assert_eq!((cells[0].m(), cells[0].n()), (1, 1));
        assert_eq!((cells[15].m(), cells[15].n()), (4, 7));
    }

    #[test]
    fn bounds() {
        assert_eq!(parse_bound("7"), Ok(Bound { coef: 0, offset: 7 }));
        assert_eq!(parse_bound(" 2 * m - 1 "), Ok(Bound { coef: 2, offset: -1 }));
        assert_eq!(parse_bound("m"), Ok(Bound { coef: 1, offset: 0 }));
        for bad in ["", "x", "m*2", "0*m", "-3", "m+", "m++1", "99999999999999999999", "1.5"] {
            assert!(parse_bound(bad).is_err(), "{bad}");
        }
        for s in ["3", "m", "2*m", "m+4", "3*m-2"] {
            assert_eq!(parse_bound(s).unwrap().to_string(), s);
        }
    }

    #[test]
    fn difference_grids_and_skipped_cells() {
        let cfg = parse_config("[grid]\nm = 2\na = 0..3\n[grid]\nm = 3..4\nn = 1..4\n").unwrap();
        let cells: Vec<_> = cfg.cells().unwrap().iter().map(|e| (e.m(), e.n())).collect();
        assert_eq!(cells, vec![(2, 2), (2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (4, 4)]);
    }

    #[test]
    fn errors_carry_line_and_field() {
        let err = parse_config("seed = 1\ntol = -1\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (2, "tol"));
        let err = parse_config("stats = mean-entropy, nonsense\n[grid]\nm=1\nn=1").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (1, "stats"));
        let err = parse_config("[grid]\nm = 1..2\nn = 1..x\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (3, "n"));
        let err = parse_config("[grid]\nn = 1\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (1, "m"));
        let err = parse_config("[grid]\nm = 1\nn = 1\na = 0\n").unwrap_err();
        assert_eq!(err.field, "a");
        let err = parse_config("seed = 2\n = 4\n").unwrap_err();
        assert_eq!((err.line, err.field.as_str()), (2, "key"));
        let err = parse_config("[other]\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(parse_config("[grid]\nm = 0\nn = 1\n").is_err());
        assert!(parse_config("[grid]\nm = 1..900\nn = m\n").is_err());
    }

    #[test]
    fn empty_grid_is_rejected() {
        for text in ["", "seed = 3\n", "[grid]\nm = 3\nn = 1..2\n", "[grid]\nm = 4..2\nn = m\n"] {
            let err = parse_config(text).unwrap_err();
            assert_eq!(err.field, "grid", "{text:?}");
        }
    }

    #[test]
    fn cell_cap() {
        let err = parse_config("[grid]\nm = 1..400\nn = m..400\n").unwrap_err();
        assert!(err.message.contains("cells"));
    }
}
