//! Exact closed forms: mean entropy, entropy variance (proven for `m = n`,
//! conjectured otherwise), mean capacity for `a = n - m ≤ 3`, and the
//! large-dimension limits.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jacobi::EnsembleParams;
use crate::special::{rational, ClosedFormValue, PolyBasisTerm, PI_SQUARED};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClosedFormError {
    #[error("no closed-form mean capacity for a = {0}; only a = 0..=3 are known")]
    UnsupportedDifference(u32),
    #[error("need n >= a + 1, got a = {a}, n = {n}")]
    InvalidDimension { a: u32, n: u32 },
    #[error("the asymptotic variance diverges at f = 1")]
    Divergent,
    #[error("dimension fraction f = {0} must lie in (0, 1]")]
    InvalidFraction(f64),
}

/// Whether a formula is a proven result or the conjectured general form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Proven,
    Conjecture,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Proven => "proven",
            Status::Conjecture => "conjecture",
        })
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Polynomial in `n` with integer coefficients listed from the highest degree.
fn poly(n: &BigRational, coeffs: &[i64]) -> BigRational {
    coeffs.iter().fold(int(0), |acc, c| acc * n + int(*c))
}

fn psi0(l: u32) -> PolyBasisTerm {
    PolyBasisTerm::digamma(l as i64)
}

fn psi1(l: u32) -> PolyBasisTerm {
    PolyBasisTerm::trigamma(l as i64)
}

/// `E[S] = (m+n-1/2)ψ₀(2m+2n) + (1/4-m)ψ₀(m+n) + (1/2-n)ψ₀(2n) - ψ₀(n)/4 - m`.
pub fn mean_entropy(e: &EnsembleParams) -> ClosedFormValue {
    let (m, n) = (e.m(), e.n());
    let (mi, ni) = (m as i64, n as i64);
    let mut v = ClosedFormValue::zero();
    v.add_term(psi0(2 * m + 2 * n), rational(2 * (mi + ni) - 1, 2));
    v.add_term(psi0(m + n), rational(1 - 4 * mi, 4));
    v.add_term(psi0(2 * n), rational(1 - 2 * ni, 2));
    v.add_term(psi0(n), rational(-1, 4));
    v.add_term(PolyBasisTerm::One, int(-mi));
    v
}

/// Exact variance at `m = n`:
/// `(1/2-2n)ψ₁(4n) + (56n²-36n+5)/(8(4n-1)) ψ₁(2n) + ψ₁(n)/8 - ψ₀(4n)/2 + ψ₀(2n)/2`.
pub fn variance_entropy_a0(n: u32) -> ClosedFormValue {
    assert!(n >= 1, "n must be positive");
    let ni = n as i64;
    let mut v = ClosedFormValue::zero();
    v.add_term(psi1(4 * n), rational(1 - 4 * ni, 2));
    v.add_term(psi1(2 * n), rational(56 * ni * ni - 36 * ni + 5, 8 * (4 * ni - 1)));
    v.add_term(psi1(n), rational(1, 8));
    v.add_term(psi0(4 * n), rational(-1, 2));
    v.add_term(psi0(2 * n), rational(1, 2));
    v
}

/// Conjectured variance for any `m ≤ n`:
/// `(1/2-m-n)ψ₁(2m+2n) + (n-1/2)ψ₁(2n) + (m(2m+n-1)/(2m+2n-1) - 1/8)ψ₁(m+n)
///  + ψ₁(n)/8 - (ψ₀(2m+2n) - ψ₀(2n))/2`.
pub fn variance_entropy_conjecture(e: &EnsembleParams) -> ClosedFormValue {
    let (m, n) = (e.m(), e.n());
    let (mi, ni) = (m as i64, n as i64);
    let mut v = ClosedFormValue::zero();
    v.add_term(psi1(2 * m + 2 * n), rational(1 - 2 * (mi + ni), 2));
    v.add_term(psi1(2 * n), rational(2 * ni - 1, 2));
    v.add_term(
        psi1(m + n),
        rational(mi * (2 * mi + ni - 1), 2 * mi + 2 * ni - 1) - rational(1, 8),
    );
    v.add_term(psi1(n), rational(1, 8));
    v.add_term(psi0(2 * m + 2 * n), rational(-1, 2));
    v.add_term(psi0(2 * n), rational(1, 2));
    v
}

/// The variance formula appropriate to `e`, with its status.
pub fn variance_entropy(e: &EnsembleParams) -> (ClosedFormValue, Status) {
    if e.a() == 0 {
        (variance_entropy_a0(e.n()), Status::Proven)
    } else {
        (variance_entropy_conjecture(e), Status::Conjecture)
    }
}

/// Limit of the variance for fixed `f = m/(m+n)`: `(f + f² + ln(1-f))/2`.
pub fn variance_entropy_asymptotic(f: f64) -> Result<f64, ClosedFormError> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(ClosedFormError::InvalidFraction(f));
    }
    if f == 1.0 {
        return Err(ClosedFormError::Divergent);
    }
    Ok((f + f * f + (-f).ln_1p()) / 2.0)
}

/// Mean capacity for `a = n - m ∈ {0, 1, 2, 3}`:
/// `x₀ ψ₁(2n) + x₁ ψ₁(n) [+ x₂ (ψ₀(2n) - ψ₀(1))] + x_last`.
pub fn mean_capacity(a: u32, n: u32) -> Result<ClosedFormValue, ClosedFormError> {
    if a > 3 {
        return Err(ClosedFormError::UnsupportedDifference(a));
    }
    if n < a + 1 {
        return Err(ClosedFormError::InvalidDimension { a, n });
    }
    let nr = int(n as i64);
    let pi2 = PolyBasisTerm::Pi2;
    let mut v = ClosedFormValue::zero();
    v.add_term(psi1(n), rational(-1, 8));
    let digamma_pair = |v: &mut ClosedFormValue, c: BigRational| {
        v.add_term(psi0(2 * n), c.clone());
        v.add_term(psi0(1), -c);
    };
    match a {
        0 => {
            v.add_term(psi1(2 * n), -poly(&nr, &[4, -4, 1]) / (int(2) * poly(&nr, &[4, -1])));
            v.add_term(pi2, poly(&nr, &[8, -4, 1]) / (int(16) * poly(&nr, &[4, -1])));
            v.add_term(PolyBasisTerm::One, poly(&nr, &[-2, 1]) / int(2));
        }
        1 => {
            v.add_term(psi1(2 * n), -poly(&nr, &[4, -8, 3]) / (int(2) * poly(&nr, &[4, -3])));
            v.add_term(pi2, poly(&nr, &[8, -12, 3]) / (int(16) * poly(&nr, &[4, -3])));
            v.add_term(
                PolyBasisTerm::One,
                -poly(&nr, &[16, -36, 28, -9]) / (int(2) * poly(&nr, &[2, -1]) * poly(&nr, &[4, -3])),
            );
        }
        2 => {
            v.add_term(psi1(2 * n), poly(&nr, &[-4, 12, -5]) / poly(&nr, &[8, -10]));
            digamma_pair(&mut v, BigRational::one() / poly(&nr, &[2, -5, 3]));
            v.add_term(pi2, poly(&nr, &[8, -20, 5]) / poly(&nr, &[64, -80]));
            v.add_term(
                PolyBasisTerm::One,
                -poly(&nr, &[32, -152, 268, -210, 75])
                    / (int(2) * poly(&nr, &[2, -3]) * poly(&nr, &[2, -1]) * poly(&nr, &[4, -5])),
            );
        }
        _ => {
            let d_common = poly(&nr, &[1, -2]) * poly(&nr, &[1, -1]) * poly(&nr, &[2, -5]) * poly(&nr, &[2, -3]);
            v.add_term(
                psi1(2 * n),
                -(poly(&nr, &[2, -7]) * poly(&nr, &[2, -1])) / (int(2) * poly(&nr, &[4, -7])),
            );
            digamma_pair(&mut v, int(2) * poly(&nr, &[4, -14, 11]) / d_common.clone());
            v.add_term(pi2, poly(&nr, &[8, -28, 7]) / (int(16) * poly(&nr, &[4, -7])));
            v.add_term(
                PolyBasisTerm::One,
                -poly(&nr, &[64, -720, 3408, -8736, 13176, -11967, 6258, -1470])
                    / (int(2) * d_common * poly(&nr, &[2, -1]) * poly(&nr, &[4, -7])),
            );
        }
    }
    Ok(v)
}

/// Mean capacity for an ensemble, when `a ≤ 3`.
pub fn mean_capacity_for(e: &EnsembleParams) -> Result<ClosedFormValue, ClosedFormError> {
    mean_capacity(e.a(), e.n())
}

/// Slope of the linear growth of `E[C]` in `n` at `a = 0`: `(π² - 8)/8`.
pub fn capacity_slope() -> f64 {
    (PI_SQUARED - 8.0) / 8.0
}
