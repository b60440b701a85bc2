//! Jacobi polynomials, the even polynomials `p_k = J^{(a,a)}_{2k}` of the
//! fermionic Gaussian ensemble, their norms, and two closed-form integrals.
//!
//! The explicit hypergeometric-type series (`Ascending`, `Descending`,
//! `Product`) alternate in sign with terms many orders of magnitude larger
//! than the polynomial itself, so they are summed exactly over the rationals
//! (every `f64` is a dyadic rational) and rounded once. Everything on a hot
//! path uses the three-term recurrence instead.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::special::{ln_gamma_signed, pochhammer_f64, CompensatedSum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JacobiError {
    #[error("Jacobi parameter {name} = {value} must exceed -1")]
    Parameter { name: &'static str, value: f64 },
    #[error("x = {0} lies outside [-1, 1]")]
    OutOfRange(f64),
    #[error("invalid subsystem dimensions m = {m}, n = {n}; need 1 <= m <= n")]
    Dimensions { m: u32, n: u32 },
    #[error("degree index k = {k} out of range for m = {m}")]
    DegreeIndex { k: u32, m: u32 },
}

/// Subsystem dimensions `m <= n` of the bipartition; `a = n - m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleParams {
    m: u32,
    n: u32,
}

impl EnsembleParams {
    pub fn new(m: u32, n: u32) -> Result<Self, JacobiError> {
        if m == 0 || m > n {
            return Err(JacobiError::Dimensions { m, n });
        }
        Ok(Self { m, n })
    }

    /// Parameters with `n = m + a`.
    pub fn with_difference(m: u32, a: u32) -> Result<Self, JacobiError> {
        Self::new(m, m + a)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Dimension difference `a = n - m`.
    pub fn a(&self) -> u32 {
        self.n - self.m
    }
}

impl std::fmt::Display for EnsembleParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(m={}, n={})", self.m, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacobiParams {
    pub alpha: f64,
    pub beta: f64,
    pub degree: u32,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64, degree: u32) -> Result<Self, JacobiError> {
        check_parameter("alpha", alpha)?;
        check_parameter("beta", beta)?;
        Ok(Self { alpha, beta, degree })
    }
}

fn check_parameter(name: &'static str, value: f64) -> Result<(), JacobiError> {
    if !value.is_finite() || value <= -1.0 {
        return Err(JacobiError::Parameter { name, value });
    }
    Ok(())
}

/// Which finite sum evaluates `J_k^{(α,β)}(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Representation {
    /// Powers of `(1+x)/2`.
    Ascending,
    /// Powers of `(1-x)/2`.
    Descending,
    /// Products `((1-x)/2)^i ((1+x)/2)^{k-i}`.
    Product,
    /// Three-term recurrence in floating point.
    Recurrence,
}

pub fn jacobi_eval(p: &JacobiParams, x: f64, rep: Representation) -> Result<f64, JacobiError> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(JacobiError::OutOfRange(x));
    }
    let value = match rep {
        Representation::Recurrence => jacobi_recurrence(p.alpha, p.beta, p.degree, x)[p.degree as usize],
        exact => series_exact(p, x, exact)
            .to_f64()
            .expect("finite rational"),
    };
    Ok(value)
}

fn to_rational(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite float")
}

fn series_exact(p: &JacobiParams, x: f64, rep: Representation) -> BigRational {
    let k = p.degree as i64;
    let a = to_rational(p.alpha);
    let b = to_rational(p.beta);
    let x = to_rational(x);
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let up = (&one + &x) / &two;
    let down = (&one - &x) / &two;
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let kab1 = &a + &b + int(k + 1);

    match rep {
        Representation::Ascending => {
            // (-1)^k (b+1)_k/k! Σ (-k)_i (k+a+b+1)_i / ((b+1)_i i!) t^i
            let mut coef = BigRational::one();
            let mut power = BigRational::one();
            let mut sum = BigRational::zero();
            for i in 0..=k {
                sum += &coef * &power;
                let ii = int(i);
                coef = coef * (int(i - k) * (&kab1 + &ii)) / ((&b + &one + &ii) * int(i + 1));
                power *= &up;
            }
            let mut pre = BigRational::one();
            for i in 0..k {
                pre = pre * (&b + int(i + 1)) / int(i + 1);
            }
            if k % 2 == 1 {
                pre = -pre;
            }
            pre * sum
        }
        Representation::Descending => {
            // 1/k! Σ (-k)_i (k+a+b+1)_i (i+a+1)_{k-i} / i! s^i
            let mut coef = BigRational::one();
            for i in 0..k {
                coef = coef * (&a + int(i + 1)) / int(i + 1);
            }
            let mut power = BigRational::one();
            let mut sum = BigRational::zero();
            for i in 0..=k {
                sum += &coef * &power;
                let ii = int(i);
                coef = coef * (int(i - k) * (&kab1 + &ii)) / (int(i + 1) * (&a + &ii + &one));
                power *= &down;
            }
            sum
        }
        Representation::Product => {
            // Σ (-1)^i Γ(a+k+1) (k+b-i+1)_i / (i! Γ(a+i+1) (k-i)!) s^i t^{k-i}
            let mut up_powers = vec![BigRational::one()];
            for _ in 0..k {
                let next = up_powers.last().expect("non-empty") * &up;
                up_powers.push(next);
            }
            let mut coef = BigRational::one();
            for i in 0..k {
                coef = coef * (&a + int(i + 1)) / int(i + 1);
            }
            let mut down_power = BigRational::one();
            let mut sum = BigRational::zero();
            for i in 0..=k {
                sum += &coef * &down_power * &up_powers[(k - i) as usize];
                if i < k {
                    coef = -coef * int(k - i) * (&b + int(k - i)) / ((&a + int(i + 1)) * int(i + 1));
                }
                down_power *= &down;
            }
            sum
        }
        Representation::Recurrence => unreachable!("handled in floating point"),
    }
}

/// `J_0 … J_{max_degree}` at `x` by the three-term recurrence.
pub fn jacobi_recurrence(alpha: f64, beta: f64, max_degree: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_degree as usize + 1);
    out.push(1.0);
    if max_degree == 0 {
        return out;
    }
    let (a, b) = (alpha, beta);
    out.push((a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0);
    for n in 1..max_degree {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        let c0 = 2.0 * (n + 1.0) * (n + a + b + 1.0) * s;
        let c1 = (s + 1.0) * ((s + 2.0) * s * x + a * a - b * b);
        let c2 = 2.0 * (n + a) * (n + b) * (s + 2.0);
        let len = out.len();
        let next = (c1 * out[len - 1] - c2 * out[len - 2]) / c0;
        out.push(next);
    }
    out
}

fn check_degree_index(e: &EnsembleParams, k: u32) -> Result<(), JacobiError> {
    if k >= e.m() {
        return Err(JacobiError::DegreeIndex { k, m: e.m() });
    }
    Ok(())
}

/// `p_k(x) = J^{(a,a)}_{2k}(x)`.
pub fn p_eval(e: &EnsembleParams, k: u32, x: f64) -> Result<f64, JacobiError> {
    check_degree_index(e, k)?;
    let a = e.a() as f64;
    Ok(jacobi_recurrence(a, a, 2 * k, x)[2 * k as usize])
}

/// `p_0(x), …, p_{m-1}(x)` in one recurrence pass.
pub fn p_values(e: &EnsembleParams, x: f64) -> Vec<f64> {
    let a = e.a() as f64;
    let all = jacobi_recurrence(a, a, 2 * (e.m() - 1), x);
    all.into_iter().step_by(2).collect()
}

/// `ln h_k` with `h_k = 2^{2a} Γ²(2k+a+1) / ((4k+2a+1) Γ(2k+2a+1) Γ(2k+1))`.
pub fn ln_norm_h(a: f64, k: u32) -> f64 {
    let k = k as f64;
    2.0 * a * std::f64::consts::LN_2 + 2.0 * ln_gamma_signed(2.0 * k + a + 1.0).0
        - (4.0 * k + 2.0 * a + 1.0).ln()
        - ln_gamma_signed(2.0 * k + 2.0 * a + 1.0).0
        - ln_gamma_signed(2.0 * k + 1.0).0
}

/// Squared norm `h_k = ∫₀¹ (1-x²)^a p_k(x)² dx`.
pub fn norm_h(e: &EnsembleParams, k: u32) -> Result<f64, JacobiError> {
    check_degree_index(e, k)?;
    Ok(ln_norm_h(e.a() as f64, k).exp())
}

fn ln_factorial(k: u32) -> f64 {
    ln_gamma_signed(k as f64 + 1.0).0
}

/// `∫_{-1}^{1} ((1-x)/2)^a ((1+x)/2)^c J_k^{(a,b)}(x) dx`
/// `= 2 Γ(c+1) Γ(k+a+1) Γ(c-b+1) / (k! Γ(k+a+c+2) Γ(c-k-b+1))`.
///
/// The ratio `Γ(c-b+1)/Γ(c-k-b+1)` is evaluated as the Pochhammer symbol
/// `(c-k-b+1)_k`, which vanishes exactly where `1/Γ(c-k-b+1)` has a zero.
pub fn integral_ac(a: f64, b: f64, c: f64, k: u32) -> Result<f64, JacobiError> {
    check_parameter("a", a)?;
    check_parameter("b", b)?;
    check_parameter("c", c)?;
    let kf = k as f64;
    let ln_mag = std::f64::consts::LN_2 + ln_gamma_signed(c + 1.0).0 + ln_gamma_signed(kf + a + 1.0).0
        - ln_factorial(k)
        - ln_gamma_signed(kf + a + c + 2.0).0;
    Ok(ln_mag.exp() * pochhammer_f64(c - kf - b + 1.0, k))
}

/// `∫_{-1}^{1} ((1-x)/2)^d ((1+x)/2)^c J_k^{(a,b)}(x) dx` by the finite sum
/// obtained from the Rodrigues formula. The gamma ratios
/// `Γ(c-b+1)/Γ(c-b+i-k+1)` and `Γ(d-a+1)/Γ(d-a-i+1)` are Pochhammer symbols.
pub fn integral_cd(a: f64, b: f64, c: f64, d: f64, k: u32) -> Result<f64, JacobiError> {
    check_parameter("a", a)?;
    check_parameter("b", b)?;
    check_parameter("c", c)?;
    check_parameter("d", d)?;
    let kf = k as f64;
    let ln_den = ln_gamma_signed(c + d + kf + 2.0).0;
    let mut acc = CompensatedSum::new();
    for i in 0..=k {
        let fi = i as f64;
        let poch = pochhammer_f64(d - a - fi + 1.0, i) * pochhammer_f64(c - b + fi - kf + 1.0, k - i);
        if poch == 0.0 {
            continue;
        }
        let ln_mag = ln_gamma_signed(c + fi + 1.0).0 + ln_gamma_signed(d - fi + kf + 1.0).0
            - ln_factorial(i)
            - ln_factorial(k - i)
            - ln_den;
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * poch * ln_mag.exp());
    }
    Ok(2.0 * acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const REPS: [Representation; 4] = [
        Representation::Ascending,
        Representation::Descending,
        Representation::Product,
        Representation::Recurrence,
    ];

    #[test]
    fn low_degree_examples() {
        let p0 = JacobiParams::new(0.0, 0.0, 0).unwrap();
        let p1 = JacobiParams::new(0.0, 0.0, 1).unwrap();
        let p2 = JacobiParams::new(0.0, 0.0, 2).unwrap();
        for rep in REPS {
            assert_eq!(jacobi_eval(&p0, 0.3, rep).unwrap(), 1.0);
            assert_relative_eq!(jacobi_eval(&p1, 0.5, rep).unwrap(), 0.5, max_relative = 1e-15);
            assert_relative_eq!(jacobi_eval(&p2, 1.0, rep).unwrap(), 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn value_at_one_is_binomial() {
        // J_k^{(a,b)}(1) = (a+1)_k / k!
        for k in 0..12u32 {
            let p = JacobiParams::new(2.5, 1.0, k).unwrap();
            let expected = pochhammer_f64(3.5, k) / (1..=k).map(f64::from).product::<f64>();
            for rep in REPS {
                assert_relative_eq!(jacobi_eval(&p, 1.0, rep).unwrap(), expected, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(JacobiParams::new(-1.0, 0.0, 2).is_err());
        assert!(JacobiParams::new(0.0, f64::NAN, 2).is_err());
        let p = JacobiParams::new(0.0, 0.0, 2).unwrap();
        assert!(matches!(jacobi_eval(&p, 1.5, Representation::Ascending), Err(JacobiError::OutOfRange(_))));
        assert!(EnsembleParams::new(3, 2).is_err());
        assert!(EnsembleParams::new(0, 2).is_err());
        let e = EnsembleParams::new(2, 3).unwrap();
        assert!(p_eval(&e, 2, 0.1).is_err());
        assert!(integral_ac(-1.5, 0.0, 0.0, 1).is_err());
        assert!(integral_cd(0.0, 0.0, 0.0, -2.0, 1).is_err());
    }

    #[test]
    fn p_examples() {
        let e = EnsembleParams::new(3, 3).unwrap();
        assert_eq!(p_eval(&e, 0, 0.7).unwrap(), 1.0);
        let e = EnsembleParams::new(2, 2).unwrap();
        let x = 0.37;
        assert_relative_eq!(p_eval(&e, 1, x).unwrap(), (3.0 * x * x - 1.0) / 2.0, max_relative = 1e-15);
        let all = p_values(&EnsembleParams::new(4, 6).unwrap(), 0.2);
        assert_eq!(all.len(), 4);
        assert_eq!(all[3], p_eval(&EnsembleParams::new(4, 6).unwrap(), 3, 0.2).unwrap());
    }

    #[test]
    fn norm_examples() {
        let a0 = EnsembleParams::new(3, 3).unwrap();
        assert_relative_eq!(norm_h(&a0, 0).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(norm_h(&a0, 1).unwrap(), 0.2, max_relative = 1e-14);
        let a1 = EnsembleParams::new(1, 2).unwrap();
        assert_relative_eq!(norm_h(&a1, 0).unwrap(), 2.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn integral_examples() {
        assert_relative_eq!(integral_ac(0.0, 0.0, 0.0, 0).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(integral_ac(0.0, 0.0, 1.0, 0).unwrap(), 1.0, max_relative = 1e-15);
        assert_eq!(integral_ac(0.0, 0.0, 0.0, 1).unwrap(), 0.0);
        assert_relative_eq!(integral_cd(0.0, 0.0, 0.0, 0.0, 0).unwrap(), 2.0, max_relative = 1e-15);
        assert_relative_eq!(integral_cd(0.0, 0.0, 1.0, 0.0, 0).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn cd_reduces_to_ac_when_d_equals_a() {
        for &(a, b, c) in &[(0.0, 0.0, 0.5), (1.5, 0.25, 2.0), (3.0, 2.0, 0.1), (0.7, 4.0, 1.3)] {
            for k in 0..8 {
                let ac = integral_ac(a, b, c, k).unwrap();
                let cd = integral_cd(a, b, c, a, k).unwrap();
                assert!((ac - cd).abs() <= 1e-12 * ac.abs().max(1.0), "a={a} b={b} c={c} k={k}: {ac} vs {cd}");
            }
        }
    }

    proptest! {
        #[test]
        fn p_k_is_even(m in 1u32..10, a in 0u32..5, k_frac in 0.0f64..1.0, x in 0.0f64..1.0) {
            let e = EnsembleParams::with_difference(m, a).unwrap();
            let k = ((k_frac * m as f64) as u32).min(m - 1);
            let plus = p_eval(&e, k, x).unwrap();
            let minus = p_eval(&e, k, -x).unwrap();
            prop_assert!((plus - minus).abs() <= 1e-12 * plus.abs().max(1.0));
        }

        #[test]
        fn series_agree_with_recurrence(a in 0u32..6, b in 0u32..6, k in 0u32..24, x in -1.0f64..1.0) {
            let p = JacobiParams::new(a as f64, b as f64, k).unwrap();
            let rec = jacobi_eval(&p, x, Representation::Recurrence).unwrap();
            let asc = jacobi_eval(&p, x, Representation::Ascending).unwrap();
            // the recurrence itself carries a few ulps per step
            prop_assert!((rec - asc).abs() <= 1e-11 * asc.abs().max(1.0), "{rec} vs {asc}");
        }
    }
}
