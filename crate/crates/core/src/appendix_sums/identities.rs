//! Randomised checks of the finite-sum identities used to simplify the sums,
//! the gamma-ratio identity family obtained from a unit-argument ₂F₁, and the
//! duplication formulas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::special::{digamma as p, gamma, trigamma as q, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub trials: usize,
    /// Largest `|lhs - rhs| / max(1, |lhs|)` over the trials.
    pub max_rel_error: f64,
    /// Parameters of the worst trial.
    pub worst_params: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn sum<F: Fn(f64) -> f64>(from: u32, to: u32, f: F) -> f64 {
    (from..=to).map(|k| f(k as f64)).collect::<CompensatedSum>().value()
}

struct Draw {
    m: u32,
    a: f64,
    b: f64,
    c: f64,
    big: f64,
}

impl Draw {
    fn sample(rng: &mut ChaCha8Rng) -> Self {
        let m = rng.random_range(1..=20);
        let a = rng.random_range(0.0..5.0);
        // keep a and b apart so that 1/(a-b) stays tame
        let mut b: f64 = rng.random_range(0.0..5.0);
        while (a - b).abs() < 0.25 {
            b = rng.random_range(0.0..5.0);
        }
        let c = rng.random_range(0.1..5.0);
        let big = m as f64 + rng.random_range(0.5..6.0);
        Self { m, a, b, c, big }
    }

    fn describe(&self) -> String {
        format!("m={} a={:.6} b={:.6} c={:.6} A={:.6}", self.m, self.a, self.b, self.c, self.big)
    }
}

type Sides = fn(&Draw) -> (f64, f64);

fn b1(d: &Draw) -> (f64, f64) {
    let (m, a) = (d.m as f64, d.a);
    (sum(1, d.m, |k| p(k + a)), (m + a) * p(m + a + 1.0) - a * p(a + 1.0) - m)
}

fn b2(d: &Draw) -> (f64, f64) {
    let (m, a) = (d.m as f64, d.a);
    (
        sum(1, d.m, |k| q(k + a)),
        (m + a) * q(m + a + 1.0) - a * q(a + 1.0) + p(m + a + 1.0) - p(a + 1.0),
    )
}

fn b3(d: &Draw) -> (f64, f64) {
    let (m, a) = (d.m as f64, d.a);
    (
        sum(1, d.m, |k| p(k + a) / (k + a)),
        (q(m + a + 1.0) - q(a + 1.0) + p(m + a + 1.0).powi(2) - p(a + 1.0).powi(2)) / 2.0,
    )
}

fn b4(d: &Draw) -> (f64, f64) {
    let m = d.m as f64;
    (
        sum(1, d.m, |k| p(m + 1.0 - k) / k),
        p(m + 1.0).powi(2) - p(1.0) * p(m + 1.0) + q(m + 1.0) - q(1.0),
    )
}

fn b5(d: &Draw) -> (f64, f64) {
    let m = d.m as f64;
    (
        sum(1, d.m, |k| p(m + 1.0 + k) / k),
        p(m + 1.0).powi(2) - p(1.0) * p(m + 1.0) - q(m + 1.0) / 2.0 + q(1.0) / 2.0,
    )
}

fn b6(d: &Draw) -> (f64, f64) {
    let (m, a, b) = (d.m as f64, d.a, d.b);
    let rhs = (b - a) * sum(1, d.m - 1, |k| p(a + k) / (b + k)) + (m + a) * p(m + a) * p(m + b)
        - a * p(a + 1.0) * p(b + 1.0)
        - (m + a - 1.0) * p(m + a)
        + a * p(a + 1.0)
        - (m + b) * p(m + b)
        + (b + 1.0) * p(b + 1.0)
        + 2.0 * m
        - 2.0;
    (sum(1, d.m, |k| p(k + a) * p(k + b)), rhs)
}

fn b7(d: &Draw) -> (f64, f64) {
    let (m, a, b) = (d.m as f64, d.a, d.b);
    let rhs = -sum(1, d.m, |k| p(k + a) / (k + b)) + p(m + a + 1.0) * p(m + b + 1.0) - p(a + 1.0) * p(b + 1.0)
        + (p(m + a + 1.0) - p(m + b + 1.0) - p(a + 1.0) + p(b + 1.0)) / (a - b);
    (sum(1, d.m, |k| p(k + b) / (k + a)), rhs)
}

fn b8(d: &Draw) -> (f64, f64) {
    let (m, a) = (d.m as f64, d.big);
    let rhs = -sum(1, d.m, |k| p(k + a - m) / k)
        + (p(a - m) + p(a + 1.0)) * (p(m + 1.0) - p(1.0))
        + ((p(a - m) - p(a + 1.0)).powi(2) + q(a + 1.0) - q(a - m)) / 2.0;
    (sum(1, d.m, |k| p(a + 1.0 - k) / k), rhs)
}

fn dup0(d: &Draw) -> (f64, f64) {
    let x = d.c;
    (p(2.0 * x), crate::special::LN_2 + (p(x) + p(x + 0.5)) / 2.0)
}

fn dup1(d: &Draw) -> (f64, f64) {
    let x = d.c;
    (q(2.0 * x), (q(x) + q(x + 0.5)) / 4.0)
}

/// Terms `1/(Γ(k+1)Γ(c+k)Γ(m+1-k)Γ(m+b+1-k))` of the ₂F₁ identity, with
/// `m ≤ 10` so every gamma value stays in range.
fn id_weight(m: f64, b: f64, c: f64, k: f64) -> f64 {
    1.0 / (gamma(k + 1.0) * gamma(c + k) * gamma(m + 1.0 - k) * gamma(m + b + 1.0 - k))
}

fn id_rhs(m: f64, b: f64, c: f64) -> f64 {
    gamma(b + c + 2.0 * m) / (gamma(m + 1.0) * gamma(b + m + 1.0) * gamma(c + m) * gamma(b + c + m))
}

fn small_m(d: &Draw) -> u32 {
    d.m.min(10)
}

fn id1(d: &Draw) -> (f64, f64) {
    let (m, b, c) = (small_m(d) as f64, d.b, d.c);
    let r = id_rhs(m, b, c);
    (sum(0, small_m(d), |k| id_weight(m, b, c, k)) / r, 1.0)
}

fn id1_b(d: &Draw) -> (f64, f64) {
    let (m, b, c) = (small_m(d) as f64, d.b, d.c);
    let r = id_rhs(m, b, c);
    (
        sum(0, small_m(d), |k| p(m + b + 1.0 - k) * id_weight(m, b, c, k)) / r,
        p(b + c + m) - p(b + c + 2.0 * m) + p(b + m + 1.0),
    )
}

fn id1_c(d: &Draw) -> (f64, f64) {
    let (m, b, c) = (small_m(d) as f64, d.b, d.c);
    let r = id_rhs(m, b, c);
    (
        sum(0, small_m(d), |k| p(c + k) * id_weight(m, b, c, k)) / r,
        p(b + c + m) - p(b + c + 2.0 * m) + p(c + m),
    )
}

fn id1_bc(d: &Draw) -> (f64, f64) {
    let (m, b, c) = (small_m(d) as f64, d.b, d.c);
    let r = id_rhs(m, b, c);
    let base = p(b + c + m) - p(b + c + 2.0 * m);
    (
        sum(0, small_m(d), |k| p(c + k) * p(m + b + 1.0 - k) * id_weight(m, b, c, k)) / r,
        (base + p(b + m + 1.0)) * (base + p(c + m)) - q(b + c + m) + q(b + c + 2.0 * m),
    )
}

const CHECKS: [(&str, Sides); 14] = [
    ("B.1", b1),
    ("B.2", b2),
    ("B.3", b3),
    ("B.4", b4),
    ("B.5", b5),
    ("B.6", b6),
    ("B.7", b7),
    ("B.8", b8),
    ("duplication-psi0", dup0),
    ("duplication-psi1", dup1),
    ("2F1-gamma-ratio", id1),
    ("2F1-d/db", id1_b),
    ("2F1-d/dc", id1_c),
    ("2F1-d2/dbdc", id1_bc),
];

/// Checks every identity at `trials` random parameter draws.
pub fn identity_suite(trials: usize, seed: u64, tolerance: f64) -> IdentityReport {
    assert!(trials >= 1, "need at least one trial");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<Draw> = (0..trials).map(|_| Draw::sample(&mut rng)).collect();
    let checks = CHECKS
        .iter()
        .map(|(name, sides)| {
            let mut worst = (0.0f64, String::new());
            for d in &draws {
                let (lhs, rhs) = sides(d);
                let err = (lhs - rhs).abs() / lhs.abs().max(1.0);
                if err.is_nan() || err > worst.0 {
                    worst = (err, d.describe());
                }
            }
            IdentityCheck {
                name: (*name).to_string(),
                trials,
                max_rel_error: worst.0,
                worst_params: worst.1,
                pass: worst.0 <= tolerance,
            }
        })
        .collect();
    IdentityReport { tolerance, checks }
}
