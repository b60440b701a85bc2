//! Finite-sum representations of the integrals behind the variance and the
//! mean capacity:
//!
//! * `I_A = ∫₀¹ v² K(x,x) dx = A₁ + A₂`
//! * `I_B = ∫∫ v(x)v(y) K²(x,y) dx dy = B₁ + B₂`
//! * `I_C = ∫₀¹ [(1+x)/2 ln²((1+x)/2) + (1-x)/2 ln²((1-x)/2)] K(x,x) dx`
//!
//! so that `V[S] = I_A - I_B` and `E[C] = I_C - I_A`. Reciprocal gamma
//! factors at non-positive integers are zero; such summands are skipped and
//! counted as resolved indeterminacies.

mod identities;

pub use identities::{identity_suite, IdentityCheck, IdentityReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::jacobi::EnsembleParams;
use crate::special::{
    digamma, digamma_int, ln_gamma_signed, polygamma_shifted, trigamma, trigamma_int, CompensatedSum, Shift,
    DIGAMMA_HALF, DIGAMMA_QUARTER, EULER_GAMMA, LN_2, ZETA2,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumEvalReport {
    pub value: f64,
    pub terms_evaluated: u64,
    pub indeterminacies_resolved: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    value: CompensatedSum,
    terms: u64,
    resolved: u64,
}

impl Tally {
    fn add(&mut self, v: f64) {
        self.value.add(v);
        self.terms += 1;
    }

    fn skip(&mut self) {
        self.resolved += 1;
    }

    fn merge(&mut self, other: &Tally, factor: f64) {
        self.value.add(factor * other.value.value());
        self.terms += other.terms;
        self.resolved += other.resolved;
    }

    fn report(&self) -> SumEvalReport {
        SumEvalReport {
            value: self.value.value(),
            terms_evaluated: self.terms,
            indeterminacies_resolved: self.resolved,
        }
    }
}

/// Sum over `k = 0..m` of per-`k` tallies; parallel over `k`, reduced in order.
fn sum_over_k<F>(m: u32, f: F) -> SumEvalReport
where
    F: Fn(u32) -> Tally + Sync + Send,
{
    let parts: Vec<Tally> = (0..m).into_par_iter().map(f).collect();
    let mut total = Tally::default();
    for p in &parts {
        total.merge(p, 1.0);
    }
    total.report()
}

fn is_positive_integer(x: f64) -> bool {
    x >= 1.0 && x.fract() == 0.0 && x < 1e15
}

fn psi0(x: f64) -> f64 {
    if is_positive_integer(x) {
        digamma_int(x as i64).expect("positive")
    } else {
        digamma(x)
    }
}

fn psi1(x: f64) -> f64 {
    if is_positive_integer(x) {
        trigamma_int(x as i64).expect("positive")
    } else {
        trigamma(x)
    }
}

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// `Π Γ(num) / Π Γ(den)` in log space; `None` when a denominator sits on a
/// pole (the ratio is then zero by the reciprocal-gamma convention).
fn gamma_ratio(num: &[f64], den: &[f64]) -> Option<f64> {
    if den.iter().any(|&x| is_pole(x)) {
        return None;
    }
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &x in num {
        let (l, s) = ln_gamma_signed(x);
        debug_assert!(l.is_finite(), "numerator gamma at a pole: {x}");
        ln += l;
        sign *= s;
    }
    for &x in den {
        let (l, s) = ln_gamma_signed(x);
        ln -= l;
        sign *= s;
    }
    Some(sign * ln.exp())
}

fn rising(x: f64, n: u32) -> f64 {
    crate::special::pochhammer_f64(x, n)
}

fn parity(j: i64) -> f64 {
    if j.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Summand of `A₁` for one `k`; `delta` shifts the inner index `j` off the
/// integers (zero for the actual sum).
fn a1_k(a: f64, k: u32, delta: f64) -> Tally {
    let mut t = Tally::default();
    let k2 = 2 * k as i64;
    let kf = k as f64;
    for j in (k2 - 2)..=k2 {
        let jr = j as f64 + delta;
        let poch = rising(jr + 1.0, 2) * rising(a + jr + 1.0, 2);
        if poch == 0.0 {
            t.skip();
            continue;
        }
        let den = libm::tgamma(2.0 * kf - jr + 1.0) * libm::tgamma(jr - 2.0 * kf + 3.0) * rising(2.0 * a + jr + 2.0 * kf + 1.0, 3);
        let d = psi0(a + jr + 3.0) - psi0(2.0 * a + jr + 2.0 * kf + 4.0) - psi0(jr - 2.0 * kf + 3.0) + psi0(jr + 3.0);
        let bracket = d * d - psi1(2.0 * a + jr + 2.0 * kf + 4.0) + psi1(a + jr + 3.0) - psi1(jr - 2.0 * kf + 3.0)
            + psi1(jr + 3.0);
        t.add(parity(j) * poch / den * bracket);
    }
    for j in 0..(k2 - 2).max(0) {
        let jr = j as f64 + delta;
        let coef = 2.0 * rising(jr + 1.0, 2) * rising(a + jr + 1.0, 2)
            / (rising(2.0 * kf - jr - 2.0, 3) * rising(2.0 * a + jr + 2.0 * kf + 1.0, 3));
        let d = psi0(2.0 * a + jr + 2.0 * kf + 4.0) - psi0(a + jr + 3.0) + psi0(2.0 * kf - jr - 2.0) - psi0(jr + 3.0);
        t.add(coef * d);
    }
    let mut out = Tally::default();
    out.merge(&t, 2.0 * (2.0 * a + 4.0 * kf + 1.0));
    out
}

/// Summand of `A₂` for one `k`; `delta` shifts `j` in the two sums whose
/// boundary terms carry `1/Γ(j)` and `1/Γ(2k-j)`.
fn a2_k(a: f64, k: u32, delta: f64) -> Tally {
    let kf = k as f64;
    let k2 = 2 * k as i64;
    let c = psi0(2.0 * a + 4.0 * kf + 4.0);
    let t1 = psi1(2.0 * a + 4.0 * kf + 4.0);
    // (2a+4k+1) Γ(2k+1) Γ(2a+2k+1) / Γ(2a+4k+4), folded into each ratio
    let pre_num = [2.0 * kf + 1.0, 2.0 * a + 2.0 * kf + 1.0];
    let pre_den = 2.0 * a + 4.0 * kf + 4.0;
    let scale = 2.0 * a + 4.0 * kf + 1.0;

    let mut t = Tally::default();
    let top = a + 2.0 * kf + 2.0;
    for i in 0..=k2 {
        let fi = i as f64;
        let ratio = gamma_ratio(
            &[pre_num[0], pre_num[1], top, top],
            &[pre_den, fi + 1.0, a + fi + 1.0, 2.0 * kf - fi + 1.0, a + 2.0 * kf - fi + 1.0],
        );
        let Some(ratio) = ratio else {
            t.skip();
            continue;
        };
        let f = 2.0 * (fi + 1.0) * (2.0 * kf - fi + 1.0) * ratio;
        let b = (psi0(top) - c - psi0(2.0) + psi0(2.0 * kf - fi + 2.0)) * (psi0(top) - c + psi0(fi + 2.0) - psi0(2.0)) - t1;
        t.add(scale * f * b);
    }
    for j in 0..=k2 {
        let jr = j as f64 + delta;
        let g1 = a + 2.0 * kf + 1.0;
        let g3 = a + 2.0 * kf + 3.0;
        let second = gamma_ratio(
            &[pre_num[0], pre_num[1], g1, g3],
            &[pre_den, jr, a + jr + 1.0, 2.0 * kf - jr + 1.0, a - jr + 2.0 * kf + 1.0],
        );
        match second {
            Some(r) => {
                let b = (psi0(g1) - c + psi0(2.0 * kf - jr + 2.0) - psi0(1.0))
                    * (psi0(g3) - c + psi0(jr + 2.0) - psi0(3.0))
                    - t1;
                t.add(-scale * (jr + 1.0) * r * b);
            }
            None => t.skip(),
        }
        let third = gamma_ratio(
            &[pre_num[0], pre_num[1], g1, g3],
            &[pre_den, jr + 1.0, a + jr + 1.0, 2.0 * kf - jr, 2.0 * kf - jr + a + 1.0],
        );
        match third {
            Some(r) => {
                let b = (psi0(g3) - c + psi0(2.0 * kf - jr + 2.0) - psi0(3.0))
                    * (psi0(g1) - c + psi0(jr + 2.0) - psi0(1.0))
                    - t1;
                t.add(-scale * (2.0 * kf - jr + 1.0) * r * b);
            }
            None => t.skip(),
        }
    }
    for j in 0..=k2 {
        let fj = j as f64;
        for i in 0..=(k2 - j - 2) {
            let fi = i as f64;
            let ratio = gamma_ratio(
                &[pre_num[0], pre_num[1], a - fj + 2.0 * kf, a + fj + 2.0 * kf + 4.0],
                &[pre_den, fi + 1.0, 2.0 * kf - fi + 1.0, a + fi + fj + 3.0, a - fi - fj + 2.0 * kf - 1.0],
            );
            let Some(ratio) = ratio else {
                t.skip();
                continue;
            };
            let f = (2.0 * kf - fi - fj - 1.0) * (fi + fj + 3.0) * ratio / rising(fj + 1.0, 3);
            let d = psi0(a + fj + 2.0 * kf + 4.0) - c + psi0(fi + fj + 4.0) - psi0(fj + 4.0);
            t.add(4.0 * scale * f * d);
        }
    }
    t
}

/// `A₁ = Σ_k (1/h_k) ∫_{-1}^{1} ((1+x)/2)² ln²((1+x)/2) (1-x²)^a p_k² dx`.
pub fn sum_a1(e: &EnsembleParams) -> SumEvalReport {
    let a = e.a() as f64;
    sum_over_k(e.m(), |k| a1_k(a, k, 0.0))
}

/// `A₂ = Σ_k (1/h_k) ∫_{-1}^{1} (1-x)/2 ln((1-x)/2) (1+x)/2 ln((1+x)/2) (1-x²)^a p_k² dx`.
pub fn sum_a2(e: &EnsembleParams) -> SumEvalReport {
    let a = e.a() as f64;
    sum_over_k(e.m(), |k| a2_k(a, k, 0.0))
}

/// `A₁` and `A₂` with the summation index shifted by `delta`, for checking
/// that the pole convention reproduces the limit `delta → 0`.
pub fn sum_a1_shifted(e: &EnsembleParams, delta: f64) -> f64 {
    let a = e.a() as f64;
    sum_over_k(e.m(), |k| a1_k(a, k, delta)).value
}

pub fn sum_a2_shifted(e: &EnsembleParams, delta: f64) -> f64 {
    let a = e.a() as f64;
    sum_over_k(e.m(), |k| a2_k(a, k, delta)).value
}

/// `(1/h_k) ∫_{-1}^{1} (1+x)/2 ln((1+x)/2) (1-x²)^a p_k² dx`, the diagonal
/// entry whose square enters `B₁`. At `a = k = 0` the digamma poles cancel
/// against `1/(k+a)`, leaving `-1/2`.
pub fn b1_bracket(a: u32, k: u32) -> f64 {
    if a == 0 && k == 0 {
        return -0.5;
    }
    let (a, k) = (a as f64, k as f64);
    1.0 + psi0(2.0 * k + a) + psi0(2.0 * k + 2.0 * a) - 2.0 * psi0(4.0 * k + 2.0 * a)
        + 0.5 * (1.0 / (k + a) - a / (2.0 * k + a) - a / (2.0 * k + a + 1.0) - 2.0 / (4.0 * k + 2.0 * a + 1.0))
}

/// `B₁ = Σ_k bracket_k²`.
pub fn sum_b1(e: &EnsembleParams) -> SumEvalReport {
    let a = e.a();
    sum_over_k(e.m(), |k| {
        let mut t = Tally::default();
        let b = b1_bracket(a, k);
        t.add(b * b);
        if a == 0 && k == 0 {
            t.resolved += 1;
        }
        t
    })
}

/// `B₂ = Σ_{k<l} 2 M_kl² / (h_k h_l)`, a rational double sum.
pub fn sum_b2(e: &EnsembleParams) -> SumEvalReport {
    let a = e.a() as f64;
    let m = e.m();
    sum_over_k(m, |k| {
        let mut t = Tally::default();
        let kf = k as f64;
        for j in 1..(m - k) {
            let jf = j as f64;
            let ratio = gamma_ratio(
                &[2.0 * a + 2.0 * kf + 1.0, 2.0 * jf + 2.0 * kf + 1.0],
                &[2.0 * kf + 1.0, 2.0 * a + 2.0 * jf + 2.0 * kf + 1.0],
            )
            .expect("positive arguments");
            let num = ratio * (2.0 * a + 4.0 * kf + 1.0) * (2.0 * a + 4.0 * jf + 4.0 * kf + 1.0);
            let den = 2.0 * (jf * (2.0 * jf - 1.0) * (2.0 * jf + 1.0)).powi(2);
            let p = 2.0 * a * a * jf + a * a + 2.0 * a * jf * jf + 4.0 * a * jf * kf + 3.0 * a * jf + 4.0 * a * kf + a
                + 2.0 * jf * jf
                + 4.0 * jf * kf
                + jf
                + 4.0 * kf * kf
                + 2.0 * kf;
            let q = (a + jf + 2.0 * kf) * (a + jf + 2.0 * kf + 1.0) * (2.0 * a + 2.0 * jf + 4.0 * kf + 1.0);
            t.add(num / den * (p / q).powi(2));
        }
        t
    })
}

/// `I_C` by its finite sum: a closed `k = 0` term plus a double sum.
pub fn sum_ic(e: &EnsembleParams) -> SumEvalReport {
    let a = e.a() as f64;
    sum_over_k(e.m(), |k| {
        let mut t = Tally::default();
        if k == 0 {
            let d = psi0(a + 2.0) - psi0(2.0 * a + 3.0);
            t.add(d * d + psi1(a + 2.0) - psi1(2.0 * a + 3.0));
            return t;
        }
        let kf = k as f64;
        let k2 = 2 * k as i64;
        let mut inner = Tally::default();
        for j in (k2 - 1)..=k2 {
            let jf = j as f64;
            let coef = parity(j) * (jf + 1.0) * (a + jf + 1.0) / rising(2.0 * a + jf + 2.0 * kf + 1.0, 2);
            let d = psi0(jf + 2.0) - psi0(2.0 * a + jf + 2.0 * kf + 3.0) + psi0(a + jf + 2.0) - psi0(jf - 2.0 * kf + 2.0);
            let b = d * d + psi1(a + jf + 2.0) - psi1(2.0 * a + jf + 2.0 * kf + 3.0) + psi1(jf + 2.0)
                - psi1(jf - 2.0 * kf + 2.0);
            inner.add(coef * b);
        }
        for j in 0..=(k2 - 2) {
            let jf = j as f64;
            let coef = 2.0 * (jf + 1.0) * (a + jf + 1.0)
                / (rising(2.0 * kf - jf - 1.0, 2) * rising(2.0 * a + jf + 2.0 * kf + 1.0, 2));
            let d = psi0(a + jf + 2.0) - psi0(2.0 * a + jf + 2.0 * kf + 3.0) - psi0(2.0 * kf - jf - 1.0) + psi0(jf + 2.0);
            inner.add(coef * d);
        }
        t.merge(&inner, 2.0 * (2.0 * a + 4.0 * kf + 1.0));
        t
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assembled {
    pub ia: f64,
    pub ib: f64,
    pub ic: f64,
    pub variance: f64,
    pub capacity: f64,
    pub terms_evaluated: u64,
    pub indeterminacies_resolved: u64,
}

/// `I_A = A₁ + A₂`, `I_B = B₁ + B₂`, `V[S] = I_A - I_B`, `E[C] = I_C - I_A`.
pub fn assemble(e: &EnsembleParams) -> Assembled {
    let parts = [sum_a1(e), sum_a2(e), sum_b1(e), sum_b2(e), sum_ic(e)];
    let [a1, a2, b1, b2, ic] = parts;
    let ia = a1.value + a2.value;
    let ib = b1.value + b2.value;
    Assembled {
        ia,
        ib,
        ic: ic.value,
        variance: ia - ib,
        capacity: ic.value - ia,
        terms_evaluated: parts.iter().map(|p| p.terms_evaluated).sum(),
        indeterminacies_resolved: parts.iter().map(|p| p.indeterminacies_resolved).sum(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SemiClosed {
    IA,
    IB,
    IC,
}

/// The three sums without closed form that appear in all of `I_A`, `I_B`,
/// `I_C` at `a = 0`: `Σ ψ₀(2k)/k`, `-Σ ψ₀(4k)/(2k)`, `Σ ψ₀(4k)/(2k+1)` over `k = 1..=n`.
pub fn basis_sums(n: u32) -> [f64; 3] {
    let mut s = [CompensatedSum::new(); 3];
    for k in 1..=n as i64 {
        let kf = k as f64;
        let p4 = digamma_int(4 * k).expect("positive");
        s[0].add(digamma_int(2 * k).expect("positive") / kf);
        s[1].add(-p4 / (2.0 * kf));
        s[2].add(p4 / (2.0 * kf + 1.0));
    }
    s.map(|c| c.value())
}

/// Individual terms of the `a = 0` semi-closed expression, basis sums first.
pub fn semi_closed_a0_terms(n: u32, which: SemiClosed) -> Vec<f64> {
    assert!(n >= 1, "n must be positive");
    let ni = n as i64;
    let nf = n as f64;
    let p = |l: i64| digamma_int(l).expect("positive");
    let q = |l: i64| trigamma_int(l).expect("positive");
    let (p_n, p_2n, p_4n) = (p(ni), p(2 * ni), p(4 * ni));
    let p_half = polygamma_shifted(0, ni, Shift::Half).expect("supported");
    let p_quarter = polygamma_shifted(0, ni, Shift::Quarter).expect("supported");
    let p1 = -EULER_GAMMA;
    let q1 = ZETA2;
    let mut t: Vec<f64> = basis_sums(n).to_vec();
    match which {
        SemiClosed::IA => t.extend([
            -(24.0 * nf * nf - 12.0 * nf + 1.0) / (4.0 * (4.0 * nf - 1.0)) * q(2 * ni),
            -q(ni) / 4.0,
            (4.0 * nf - 1.0) * p_4n * p_4n,
            2.0 * (1.0 - 4.0 * nf) * p_2n * p_4n,
            (8.0 * nf - 3.0) / 2.0 * p_2n * p_2n,
            p_n * p_2n,
            -p_n * p_n / 2.0,
            -(16.0 * nf.powi(3) + 8.0 * nf * nf - 1.0) / (2.0 * nf * (2.0 * nf + 1.0)) * p_4n,
            (8.0 * nf + 1.0) / 2.0 * p_2n,
            -(1.0 / (2.0 * nf) + LN_2) * p_n,
            -p_n * p_half / 2.0,
            -(2.0 * nf + 1.0) / (2.0 * nf) * p_half,
            p_quarter / 2.0,
            nf * (5.0 * nf - 2.0) / (4.0 * nf - 1.0) * q1,
            (0.5 + LN_2) * p1,
            DIGAMMA_HALF * p1 / 2.0,
            DIGAMMA_HALF,
            -DIGAMMA_QUARTER / 2.0,
            -LN_2 / nf,
            -nf,
            2.0,
        ]),
        SemiClosed::IB => t.extend([
            (4.0 * nf - 1.0) / 2.0 * q(4 * ni),
            -(104.0 * nf * nf - 60.0 * nf + 7.0) / (8.0 * (4.0 * nf - 1.0)) * q(2 * ni),
            -3.0 * q(ni) / 8.0,
            (4.0 * nf - 1.0) * p_4n * p_4n,
            -2.0 * (4.0 * nf - 1.0) * p_2n * p_4n,
            (8.0 * nf - 3.0) / 2.0 * p_2n * p_2n,
            p_n * p_2n,
            -p_n * p_n / 2.0,
            (-16.0 * nf.powi(3) - 6.0 * nf * nf + nf + 1.0) / (2.0 * nf * (2.0 * nf + 1.0)) * p_4n,
            4.0 * nf * p_2n,
            -(1.0 / (2.0 * nf) + LN_2) * p_n,
            -p_n * p_half / 2.0,
            -(2.0 * nf + 1.0) / (2.0 * nf) * p_half,
            p_quarter / 2.0,
            (5.0 * nf - 2.0) / (4.0 * nf - 1.0) * nf * q1,
            (0.5 + LN_2) * p1,
            DIGAMMA_HALF * p1 / 2.0,
            -DIGAMMA_QUARTER / 2.0,
            DIGAMMA_HALF,
            -LN_2 / nf,
            -nf,
            2.0,
        ]),
        SemiClosed::IC => t.extend([
            -(8.0 * nf - 3.0) / 4.0 * q(2 * ni),
            -3.0 * q(ni) / 8.0,
            (4.0 * nf - 1.0) * p_4n * p_4n,
            -2.0 * (4.0 * nf - 1.0) * p_2n * p_4n,
            (8.0 * nf - 3.0) / 2.0 * p_2n * p_2n,
            -(16.0 * nf.powi(3) + 8.0 * nf * nf - 1.0) / (2.0 * nf * (2.0 * nf + 1.0)) * p_4n,
            (8.0 * nf * nf - 3.0 * nf - 2.0) / (2.0 * nf) * p_2n,
            p_n,
            p_quarter / 2.0,
            (16.0 * nf - 3.0) / 8.0 * q1,
            p1 * p1 / 2.0,
            1.5 * p1,
            -DIGAMMA_QUARTER / 2.0,
            -2.0 * nf,
            2.5,
        ]),
    }
    t
}

/// Semi-closed `I_A`, `I_B` or `I_C` at `a = 0` (`m = n`).
pub fn semi_closed_a0(n: u32, which: SemiClosed) -> f64 {
    semi_closed_a0_terms(n, which).into_iter().collect::<CompensatedSum>().value()
}

/// `I_X - I_Y` at `a = 0` from the combined term lists, so that identical
/// terms (the basis sums among them) cancel before rounding.
pub fn semi_closed_a0_difference(n: u32, x: SemiClosed, y: SemiClosed) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in semi_closed_a0_terms(n, x) {
        acc.add(v);
    }
    for v in semi_closed_a0_terms(n, y) {
        acc.add(-v);
    }
    acc.value()
}
