//! Gamma-family functions at the arguments the entanglement statistics need.
//!
//! Integer arguments go through the finite-sum forms
//! `ψ₀(l) = -γ + Σ_{k<l} 1/k` and `ψ₁(l) = π²/6 - Σ_{k<l} 1/k²`; quarter and
//! half-integer shifts are anchored at stored reference constants and walked
//! up by recurrence. Real-argument versions exist for the identity suite and
//! for the quadrature oracles of the Jacobi integral identities.

mod basis;

pub use basis::{ClosedFormValue, PolyBasisTerm, QuarterArg};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_431;
/// π².
pub const PI_SQUARED: f64 = 9.869_604_401_089_358_618_834_490_999_876_151_14;
/// ζ(2) = π²/6 = ψ₁(1).
pub const ZETA2: f64 = PI_SQUARED / 6.0;
/// ln 2.
pub const LN_2: f64 = std::f64::consts::LN_2;

// Reference values of ψ₀ and ψ₁ below 1, rounded from 36 digits.
#[allow(clippy::excessive_precision)]
pub(crate) const DIGAMMA_QUARTER: f64 = -4.227_453_533_376_265_408_089_530_146_096_683_58;
#[allow(clippy::excessive_precision)]
pub(crate) const DIGAMMA_HALF: f64 = -1.963_510_026_021_423_479_440_976_332_998_755_57;
#[allow(clippy::excessive_precision)]
pub(crate) const DIGAMMA_THREE_QUARTERS: f64 = -1.085_860_879_786_472_169_626_886_762_817_180_69;
pub(crate) const TRIGAMMA_QUARTER: f64 = 17.197_329_154_507_110_739_271_319_119_335_224;
pub(crate) const TRIGAMMA_HALF: f64 = 4.934_802_200_544_679_309_417_245_499_938_075_57;
pub(crate) const TRIGAMMA_THREE_QUARTERS: f64 = 2.541_879_647_671_606_498_397_662_880_417_078_25;

/// Largest integer argument summed term by term; above it the asymptotic
/// series is used.
const DIGAMMA_DIRECT_LIMIT: i64 = 1_000_000;
const TRIGAMMA_DIRECT_LIMIT: i64 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("argument {0} is outside the domain (must be a positive integer)")]
    NonPositive(i64),
    #[error("unsupported shift {0}; expected 1/4, 1/2 or 3/4")]
    UnsupportedShift(String),
    #[error("unsupported polygamma order {0}; only 0 and 1 are implemented")]
    UnsupportedOrder(u32),
    #[error("pole expansion requested around a positive point (l = {0})")]
    NegativeExpansionIndex(i64),
    #[error("basis argument must be positive, got {0}/4")]
    NonPositiveBasisArgument(i64),
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Sum with compensation.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// `ψ₀(l) = -γ + Σ_{k=1}^{l-1} 1/k`.
pub fn digamma_int(l: i64) -> Result<f64, SpecialError> {
    if l < 1 {
        return Err(SpecialError::NonPositive(l));
    }
    if l > DIGAMMA_DIRECT_LIMIT {
        return Ok(digamma_asymptotic(l as f64));
    }
    let mut acc = CompensatedSum::new();
    acc.add(-EULER_GAMMA);
    for k in 1..l {
        acc.add(1.0 / k as f64);
    }
    Ok(acc.value())
}

/// `ψ₁(l) = π²/6 - Σ_{k=1}^{l-1} 1/k²`.
pub fn trigamma_int(l: i64) -> Result<f64, SpecialError> {
    if l < 1 {
        return Err(SpecialError::NonPositive(l));
    }
    if l > TRIGAMMA_DIRECT_LIMIT {
        return Ok(trigamma_asymptotic(l as f64));
    }
    let mut acc = CompensatedSum::new();
    acc.add(ZETA2);
    for k in 1..l {
        let k = k as f64;
        acc.add(-1.0 / (k * k));
    }
    Ok(acc.value())
}

// Bernoulli-number expansions, valid to ~1e-17 relative for x >= 10.
fn digamma_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    x.ln() - 0.5 * inv - series
}

fn trigamma_asymptotic(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = 1.0 / 6.0
        - inv2
            * (1.0 / 30.0
                - inv2
                    * (1.0 / 42.0
                        - inv2
                            * (1.0 / 30.0
                                - inv2 * (5.0 / 66.0 - inv2 * (691.0 / 2730.0 - inv2 * 7.0 / 6.0)))));
    inv + 0.5 * inv2 + inv * inv2 * series
}

/// Distance from `x` to the nearest integer together with that integer.
fn split_nearest_integer(x: f64) -> (f64, f64) {
    let n = x.round();
    (x - n, n)
}

/// `sin(π x)` without the loss of accuracy near integers.
fn sin_pi(x: f64) -> f64 {
    let (r, n) = split_nearest_integer(x);
    let s = (std::f64::consts::PI * r).sin();
    if n.rem_euclid(2.0) == 0.0 {
        s
    } else {
        -s
    }
}

fn tan_pi(x: f64) -> f64 {
    let (r, _) = split_nearest_integer(x);
    (std::f64::consts::PI * r).tan()
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Digamma for real arguments. Returns NaN at the poles `x = 0, -1, -2, …`.
pub fn digamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) || x.is_nan() {
        return f64::NAN;
    }
    if x > 0.0 && x.fract() == 0.0 && x <= DIGAMMA_DIRECT_LIMIT as f64 {
        return digamma_int(x as i64).expect("positive integer");
    }
    if x < 0.5 {
        return digamma(1.0 - x) - std::f64::consts::PI / tan_pi(x);
    }
    let mut acc = CompensatedSum::new();
    let mut y = x;
    while y < 10.0 {
        acc.add(-1.0 / y);
        y += 1.0;
    }
    acc.add(digamma_asymptotic(y));
    acc.value()
}

/// Trigamma for real arguments. Returns NaN at the poles.
pub fn trigamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) || x.is_nan() {
        return f64::NAN;
    }
    if x > 0.0 && x.fract() == 0.0 && x <= 1.0e15 {
        return trigamma_int(x as i64).expect("positive integer");
    }
    if x < 0.5 {
        let s = sin_pi(x);
        return -trigamma(1.0 - x) + PI_SQUARED / (s * s);
    }
    let mut acc = CompensatedSum::new();
    let mut y = x;
    while y < 10.0 {
        acc.add(1.0 / (y * y));
        y += 1.0;
    }
    acc.add(trigamma_asymptotic(y));
    acc.value()
}

/// `(ln|Γ(x)|, sign Γ(x))`. At the poles the magnitude is `+∞`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if is_nonpositive_integer(x) {
        return (f64::INFINITY, 1.0);
    }
    let (lg, sign) = libm::lgamma_r(x);
    (lg, if sign < 0 { -1.0 } else { 1.0 })
}

/// `Γ(x)` for real arguments.
pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::NAN;
    }
    libm::tgamma(x)
}

/// `1/Γ(x)`, exactly zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    let (lg, sign) = ln_gamma_signed(x);
    sign * (-lg).exp()
}

/// `1/Γ(l)` for integer `l`; zero for `l <= 0`.
pub fn reciprocal_gamma_int(l: i64) -> f64 {
    if l <= 0 {
        return 0.0;
    }
    if l <= 171 {
        let mut f = 1.0f64;
        for k in 2..l {
            f *= k as f64;
        }
        return 1.0 / f;
    }
    (-ln_gamma_signed(l as f64).0).exp()
}

/// Fractional shift supported by [`polygamma_shifted`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Shift {
    Quarter,
    Half,
    ThreeQuarters,
}

impl Shift {
    pub fn as_f64(self) -> f64 {
        match self {
            Shift::Quarter => 0.25,
            Shift::Half => 0.5,
            Shift::ThreeQuarters => 0.75,
        }
    }

    /// Shift expressed in quarters.
    pub fn quarters(self) -> i64 {
        match self {
            Shift::Quarter => 1,
            Shift::Half => 2,
            Shift::ThreeQuarters => 3,
        }
    }

    pub fn from_quarters(q: i64) -> Option<Self> {
        match q {
            1 => Some(Shift::Quarter),
            2 => Some(Shift::Half),
            3 => Some(Shift::ThreeQuarters),
            _ => None,
        }
    }

    pub fn from_rational(r: &BigRational) -> Result<Self, SpecialError> {
        let four = BigRational::from_integer(BigInt::from(4));
        let q = r * &four;
        if q.is_integer() {
            if let Some(s) = num_traits::ToPrimitive::to_i64(&q.to_integer()).and_then(Shift::from_quarters) {
                return Ok(s);
            }
        }
        Err(SpecialError::UnsupportedShift(r.to_string()))
    }

    fn anchors(self) -> (f64, f64) {
        match self {
            Shift::Quarter => (DIGAMMA_QUARTER, TRIGAMMA_QUARTER),
            Shift::Half => (DIGAMMA_HALF, TRIGAMMA_HALF),
            Shift::ThreeQuarters => (DIGAMMA_THREE_QUARTERS, TRIGAMMA_THREE_QUARTERS),
        }
    }
}

/// `ψ_order(base + shift)` for `order ∈ {0, 1}`.
///
/// `base = 0` returns the anchor constant itself. The half-integer anchor
/// satisfies the two-fold duplication formula at `k = 1/2`,
/// `ψ₀(1/2) = ψ₀(1) - 2 ln 2` and `ψ₁(1/2) = 3 ψ₁(1)`.
pub fn polygamma_shifted(order: u32, base: i64, shift: Shift) -> Result<f64, SpecialError> {
    if base < 0 {
        return Err(SpecialError::NonPositive(base));
    }
    let (d0, d1) = shift.anchors();
    let s = shift.as_f64();
    let mut acc = CompensatedSum::new();
    match order {
        0 => {
            acc.add(d0);
            for j in 0..base {
                acc.add(1.0 / (j as f64 + s));
            }
        }
        1 => {
            if base > TRIGAMMA_DIRECT_LIMIT {
                return Ok(trigamma_asymptotic(base as f64 + s));
            }
            acc.add(d1);
            for j in 0..base {
                let y = j as f64 + s;
                acc.add(-1.0 / (y * y));
            }
        }
        other => return Err(SpecialError::UnsupportedOrder(other)),
    }
    Ok(acc.value())
}

/// Rising factorial `(a)_n = a (a+1) … (a+n-1)`, exact.
pub fn pochhammer(a: &BigRational, n: u32) -> BigRational {
    let mut acc = BigRational::one();
    let mut term = a.clone();
    for _ in 0..n {
        if term.is_zero() {
            return BigRational::zero();
        }
        acc *= &term;
        term += BigRational::one();
    }
    acc
}

/// Rising factorial in floating point.
pub fn pochhammer_f64(a: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

/// Function whose expansion around a non-positive integer is requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PoleKind {
    Gamma,
    Digamma,
    Trigamma,
}

/// Truncated Laurent expansion `Σ coefficient(p) ε^p` around `-l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleExpansion {
    pub kind: PoleKind,
    pub l: i64,
    /// `(power of ε, coefficient)`, ascending in the power.
    pub coefficients: Vec<(i32, ClosedFormValue)>,
}

impl PoleExpansion {
    pub fn coefficient(&self, power: i32) -> Option<&ClosedFormValue> {
        self.coefficients.iter().find(|(p, _)| *p == power).map(|(_, c)| c)
    }

    /// Value of the truncated series at `ε`.
    pub fn evaluate(&self, eps: f64) -> f64 {
        compensated_sum(self.coefficients.iter().map(|(p, c)| c.evaluate() * eps.powi(*p)))
    }
}

/// Expansions of Γ, ψ₀, ψ₁ at `-l + ε` for `l >= 0`:
///
/// * `Γ(-l+ε) = (-1)^l/(l! ε) (1 + ψ₀(l+1) ε + …)`
/// * `ψ₀(-l+ε) = -1/ε + ψ₀(l+1) + (2ψ₁(1) - ψ₁(l+1)) ε + …`
/// * `ψ₁(-l+ε) = 1/ε² - ψ₁(l+1) + ψ₁(1) + ζ(2) + …`
pub fn pole_expansion(kind: PoleKind, l: i64) -> Result<PoleExpansion, SpecialError> {
    if l < 0 {
        return Err(SpecialError::NegativeExpansionIndex(l));
    }
    let next = QuarterArg::integer(l + 1).expect("l + 1 >= 1");
    let one = QuarterArg::integer(1).expect("1");
    let coefficients = match kind {
        PoleKind::Gamma => {
            let mut fact = BigInt::one();
            for k in 2..=l {
                fact *= BigInt::from(k);
            }
            let sign = if l % 2 == 0 { BigInt::one() } else { -BigInt::one() };
            let residue = BigRational::new(sign, fact);
            vec![
                (-1, ClosedFormValue::constant(residue.clone())),
                (0, ClosedFormValue::term(PolyBasisTerm::Digamma(next), residue)),
            ]
        }
        PoleKind::Digamma => {
            let mut linear = ClosedFormValue::term(PolyBasisTerm::Trigamma(one), rational(2, 1));
            linear.add_term(PolyBasisTerm::Trigamma(next), rational(-1, 1));
            vec![
                (-1, ClosedFormValue::constant(rational(-1, 1))),
                (0, ClosedFormValue::term(PolyBasisTerm::Digamma(next), rational(1, 1))),
                (1, linear),
            ]
        }
        PoleKind::Trigamma => {
            let mut constant = ClosedFormValue::term(PolyBasisTerm::Trigamma(next), rational(-1, 1));
            constant.add_term(PolyBasisTerm::Trigamma(one), rational(1, 1));
            // ζ(2) = π²/6
            constant.add_term(PolyBasisTerm::Pi2, rational(1, 6));
            vec![
                (-2, ClosedFormValue::constant(rational(1, 1))),
                (0, constant),
            ]
        }
    };
    Ok(PoleExpansion { kind, l, coefficients })
}

/// `num/den` as an exact rational.
pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}
