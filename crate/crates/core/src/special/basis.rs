use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{
    compensated_sum, digamma_int, polygamma_shifted, trigamma_int, Shift, SpecialError, EULER_GAMMA,
    LN_2, PI_SQUARED,
};

/// Positive argument `quarters / 4` of a polygamma basis term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QuarterArg(i64);

impl QuarterArg {
    pub fn new(quarters: i64) -> Result<Self, SpecialError> {
        if quarters <= 0 {
            return Err(SpecialError::NonPositiveBasisArgument(quarters));
        }
        Ok(QuarterArg(quarters))
    }

    pub fn integer(l: i64) -> Result<Self, SpecialError> {
        QuarterArg::new(l.checked_mul(4).ok_or(SpecialError::NonPositiveBasisArgument(l))?)
    }

    pub fn quarters(self) -> i64 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 4.0
    }

    /// Integer part and fractional shift; the shift is `None` for integers.
    pub fn split(self) -> (i64, Option<Shift>) {
        (self.0 / 4, Shift::from_quarters(self.0 % 4))
    }

    pub fn is_integer(self) -> bool {
        self.0 % 4 == 0
    }
}

impl fmt::Display for QuarterArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 % 4 {
            0 => write!(f, "{}", self.0 / 4),
            2 => write!(f, "{}/2", self.0 / 2),
            _ => write!(f, "{}/4", self.0),
        }
    }
}

/// One element of the basis that closed-form statistics are expanded over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PolyBasisTerm {
    One,
    EulerGamma,
    Pi2,
    Ln2,
    Digamma(QuarterArg),
    Trigamma(QuarterArg),
}

impl PolyBasisTerm {
    pub fn digamma(l: i64) -> Self {
        PolyBasisTerm::Digamma(QuarterArg::integer(l).expect("digamma basis argument must be positive"))
    }

    pub fn trigamma(l: i64) -> Self {
        PolyBasisTerm::Trigamma(QuarterArg::integer(l).expect("trigamma basis argument must be positive"))
    }

    pub fn value(self) -> f64 {
        match self {
            PolyBasisTerm::One => 1.0,
            PolyBasisTerm::EulerGamma => EULER_GAMMA,
            PolyBasisTerm::Pi2 => PI_SQUARED,
            PolyBasisTerm::Ln2 => LN_2,
            PolyBasisTerm::Digamma(arg) => polygamma_at(0, arg),
            PolyBasisTerm::Trigamma(arg) => polygamma_at(1, arg),
        }
    }
}

fn polygamma_at(order: u32, arg: QuarterArg) -> f64 {
    let (base, shift) = arg.split();
    match (order, shift) {
        (0, None) => digamma_int(base).expect("positive by construction"),
        (_, None) => trigamma_int(base).expect("positive by construction"),
        (_, Some(s)) => polygamma_shifted(order, base, s).expect("order 0 or 1"),
    }
}

impl fmt::Display for PolyBasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolyBasisTerm::One => write!(f, "1"),
            PolyBasisTerm::EulerGamma => write!(f, "gamma"),
            PolyBasisTerm::Pi2 => write!(f, "pi^2"),
            PolyBasisTerm::Ln2 => write!(f, "ln2"),
            PolyBasisTerm::Digamma(a) => write!(f, "psi0({a})"),
            PolyBasisTerm::Trigamma(a) => write!(f, "psi1({a})"),
        }
    }
}

/// Exact rational linear combination of basis terms.
///
/// Terms with a zero coefficient are never stored, so two values are equal
/// exactly when they have the same expansion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedFormValue {
    #[serde(with = "term_map")]
    terms: BTreeMap<PolyBasisTerm, BigRational>,
}

impl ClosedFormValue {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(PolyBasisTerm::One, c)
    }

    pub fn term(t: PolyBasisTerm, c: BigRational) -> Self {
        let mut v = Self::zero();
        v.add_term(t, c);
        v
    }

    pub fn add_term(&mut self, t: PolyBasisTerm, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(t).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&t);
        }
    }

    pub fn coefficient(&self, t: &PolyBasisTerm) -> BigRational {
        self.terms.get(t).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PolyBasisTerm, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(t, c)| (*t, c * factor)).collect(),
        }
    }

    /// Floating-point value: Σ coefficient × basis value.
    pub fn evaluate(&self) -> f64 {
        compensated_sum(self.terms.iter().map(|(t, c)| {
            c.to_f64().expect("finite rational coefficient") * t.value()
        }))
    }

    /// Rewrite every polygamma term with argument at most `max_arg` through
    /// the recurrences onto the irreducible basis
    /// `{1, γ, π², ln 2, ψ₀(1/4), ψ₀(3/4), ψ₁(1/4), ψ₁(3/4)}`.
    ///
    /// Integer and half-integer arguments disappear entirely:
    /// `ψ₀(1/2) = -γ - 2 ln 2`, `ψ₁(1/2) = π²/2`, `ψ₁(1) = π²/6`.
    pub fn expand_exact(&self, max_arg: i64) -> Self {
        let mut out = Self::zero();
        for (t, c) in &self.terms {
            match *t {
                PolyBasisTerm::Digamma(a) if a.quarters() <= 4 * max_arg => {
                    for (bt, bc) in expand_digamma(a) {
                        out.add_term(bt, bc * c);
                    }
                }
                PolyBasisTerm::Trigamma(a) if a.quarters() <= 4 * max_arg => {
                    for (bt, bc) in expand_trigamma(a) {
                        out.add_term(bt, bc * c);
                    }
                }
                other => out.add_term(other, c.clone()),
            }
        }
        out
    }

    /// Rational part when the value has no other basis content.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&PolyBasisTerm::One).cloned(),
            _ => None,
        }
    }
}

fn quarter_shift_anchor(q: i64) -> i64 {
    match q % 4 {
        0 => 4,
        r => r,
    }
}

// Σ_{j=0}^{steps-1} 1/(anchor/4 + j)^power over the recurrence ladder.
fn ladder_sum(anchor_quarters: i64, steps: i64, power: u32) -> BigRational {
    let mut acc = BigRational::zero();
    for j in 0..steps {
        let denom = BigInt::from(anchor_quarters + 4 * j);
        let term = BigRational::new(BigInt::from(4), denom);
        acc += num_traits::pow(term, power as usize);
    }
    acc
}

fn expand_digamma(a: QuarterArg) -> Vec<(PolyBasisTerm, BigRational)> {
    let q = a.quarters();
    let anchor = quarter_shift_anchor(q);
    let steps = (q - anchor) / 4;
    let mut out = vec![(PolyBasisTerm::One, ladder_sum(anchor, steps, 1))];
    let one = BigRational::one();
    match anchor {
        4 => out.push((PolyBasisTerm::EulerGamma, -one)),
        2 => {
            out.push((PolyBasisTerm::EulerGamma, -one));
            out.push((PolyBasisTerm::Ln2, BigRational::from_integer(BigInt::from(-2))));
        }
        r => out.push((PolyBasisTerm::Digamma(QuarterArg(r)), one)),
    }
    out
}

fn expand_trigamma(a: QuarterArg) -> Vec<(PolyBasisTerm, BigRational)> {
    let q = a.quarters();
    let anchor = quarter_shift_anchor(q);
    let steps = (q - anchor) / 4;
    let mut out = vec![(PolyBasisTerm::One, -ladder_sum(anchor, steps, 2))];
    match anchor {
        4 => out.push((PolyBasisTerm::Pi2, BigRational::new(BigInt::one(), BigInt::from(6)))),
        2 => out.push((PolyBasisTerm::Pi2, BigRational::new(BigInt::one(), BigInt::from(2)))),
        r => out.push((PolyBasisTerm::Trigamma(QuarterArg(r)), BigRational::one())),
    }
    out
}

impl AddAssign<&ClosedFormValue> for ClosedFormValue {
    fn add_assign(&mut self, rhs: &ClosedFormValue) {
        for (t, c) in &rhs.terms {
            self.add_term(*t, c.clone());
        }
    }
}

impl Add for ClosedFormValue {
    type Output = ClosedFormValue;
    fn add(mut self, rhs: ClosedFormValue) -> ClosedFormValue {
        self += &rhs;
        self
    }
}

impl Neg for ClosedFormValue {
    type Output = ClosedFormValue;
    fn neg(self) -> ClosedFormValue {
        ClosedFormValue {
            terms: self.terms.into_iter().map(|(t, c)| (t, -c)).collect(),
        }
    }
}

impl Sub for ClosedFormValue {
    type Output = ClosedFormValue;
    fn sub(self, rhs: ClosedFormValue) -> ClosedFormValue {
        self + (-rhs)
    }
}

impl Mul<&BigRational> for &ClosedFormValue {
    type Output = ClosedFormValue;
    fn mul(self, rhs: &BigRational) -> ClosedFormValue {
        self.scale(rhs)
    }
}

impl fmt::Display for ClosedFormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (t, c)) in self.terms.iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            let mag = c.abs();
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            match t {
                PolyBasisTerm::One => write!(f, "{mag}")?,
                _ if mag.is_one() => write!(f, "{t}")?,
                _ => write!(f, "({mag})*{t}")?,
            }
        }
        Ok(())
    }
}

/// Serialises the term map as a list of `{term, coefficient}` records with
/// coefficients as exact `p/q` strings.
mod term_map {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        term: PolyBasisTerm,
        coefficient: String,
    }

    pub fn serialize<S: Serializer>(map: &BTreeMap<PolyBasisTerm, BigRational>, s: S) -> Result<S::Ok, S::Error> {
        let entries: Vec<Entry> = map
            .iter()
            .map(|(t, c)| Entry { term: *t, coefficient: c.to_string() })
            .collect();
        entries.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<PolyBasisTerm, BigRational>, D::Error> {
        let entries = Vec::<Entry>::deserialize(d)?;
        let mut out = BTreeMap::new();
        for e in entries {
            let c: BigRational = e.coefficient.parse().map_err(serde::de::Error::custom)?;
            if !c.is_zero() {
                out.insert(e.term, c);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{rational, DIGAMMA_QUARTER, ZETA2};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn evaluate_examples() {
        let half = ClosedFormValue::constant(rational(1, 2));
        assert_eq!(half.evaluate(), 0.5);
        let t = ClosedFormValue::term(PolyBasisTerm::trigamma(1), rational(1, 8));
        assert_relative_eq!(t.evaluate(), PI_SQUARED / 48.0, max_relative = 1e-15);
        let mut v = ClosedFormValue::constant(rational(7, 12));
        v.add_term(PolyBasisTerm::trigamma(1), rational(-1, 3));
        assert_relative_eq!(v.evaluate(), 7.0 / 12.0 - PI_SQUARED / 18.0, max_relative = 1e-14);
    }

    #[test]
    fn duplicate_terms_merge_and_cancel() {
        let mut v = ClosedFormValue::term(PolyBasisTerm::digamma(3), rational(1, 2));
        v.add_term(PolyBasisTerm::digamma(3), rational(1, 3));
        assert_eq!(v.len(), 1);
        assert_eq!(v.coefficient(&PolyBasisTerm::digamma(3)), rational(5, 6));
        v.add_term(PolyBasisTerm::digamma(3), rational(-5, 6));
        assert!(v.is_empty());
        assert_eq!(v.evaluate(), 0.0);
    }

    #[test]
    fn expansion_removes_integer_and_half_arguments() {
        // ψ₀(3/2) = 2 - γ - 2 ln 2
        let v = ClosedFormValue::term(PolyBasisTerm::Digamma(QuarterArg::new(6).unwrap()), rational(1, 1));
        let e = v.expand_exact(10);
        assert_eq!(e.coefficient(&PolyBasisTerm::One), rational(2, 1));
        assert_eq!(e.coefficient(&PolyBasisTerm::EulerGamma), rational(-1, 1));
        assert_eq!(e.coefficient(&PolyBasisTerm::Ln2), rational(-2, 1));
        // ψ₁(4) = π²/6 - 49/36
        let v = ClosedFormValue::term(PolyBasisTerm::trigamma(4), rational(1, 1)).expand_exact(10);
        assert_eq!(v.coefficient(&PolyBasisTerm::One), rational(-49, 36));
        assert_eq!(v.coefficient(&PolyBasisTerm::Pi2), rational(1, 6));
        // ψ₀(5/4) keeps the quarter anchor
        let v = ClosedFormValue::term(PolyBasisTerm::Digamma(QuarterArg::new(5).unwrap()), rational(1, 1))
            .expand_exact(10);
        assert_eq!(v.coefficient(&PolyBasisTerm::One), rational(4, 1));
        assert_relative_eq!(v.evaluate(), DIGAMMA_QUARTER + 4.0, max_relative = 1e-15);
        // arguments above the limit are left alone
        let v = ClosedFormValue::term(PolyBasisTerm::trigamma(40), rational(1, 1));
        assert_eq!(v.expand_exact(10), v);
    }

    #[test]
    fn serde_round_trip_keeps_exact_coefficients() {
        let mut v = ClosedFormValue::constant(rational(-7, 3));
        v.add_term(PolyBasisTerm::Digamma(QuarterArg::new(9).unwrap()), rational(1, 8));
        let json = serde_json::to_string(&v).unwrap();
        let back: ClosedFormValue = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn display_is_readable() {
        let mut v = ClosedFormValue::constant(rational(1, 2));
        v.add_term(PolyBasisTerm::trigamma(2), rational(-1, 8));
        v.add_term(PolyBasisTerm::digamma(4), rational(1, 1));
        assert_eq!(v.to_string(), "1/2 + psi0(4) - (1/8)*psi1(2)");
        assert_eq!(ClosedFormValue::zero().to_string(), "0");
    }

    #[test]
    fn zeta2_constant_matches_trigamma_one() {
        assert_relative_eq!(PolyBasisTerm::trigamma(1).value(), ZETA2, max_relative = 1e-16);
    }

    fn arb_value() -> impl Strategy<Value = ClosedFormValue> {
        let term = prop_oneof![
            Just(PolyBasisTerm::One),
            Just(PolyBasisTerm::EulerGamma),
            Just(PolyBasisTerm::Pi2),
            Just(PolyBasisTerm::Ln2),
            (1i64..200).prop_map(|q| PolyBasisTerm::Digamma(QuarterArg::new(q).unwrap())),
            (1i64..200).prop_map(|q| PolyBasisTerm::Trigamma(QuarterArg::new(q).unwrap())),
        ];
        proptest::collection::vec((term, 1i64..50, 1i64..50), 0..6).prop_map(|entries| {
            let mut v = ClosedFormValue::zero();
            for (t, p, q) in entries {
                v.add_term(t, rational(p, q));
            }
            v
        })
    }

    proptest! {
        #[test]
        fn evaluation_is_linear(u in arb_value(), v in arb_value(), p in -20i64..20, q in 1i64..20) {
            let alpha = rational(p, q);
            let combined = u.scale(&alpha) + v.clone();
            let lhs = combined.evaluate();
            let rhs = (p as f64 / q as f64) * u.evaluate() + v.evaluate();
            let scale = (p as f64 / q as f64).abs() * magnitude(&u) + magnitude(&v);
            prop_assert!((lhs - rhs).abs() <= 1e-14 * scale.max(1.0), "{lhs} vs {rhs}");
        }

        #[test]
        fn exact_expansion_preserves_value(u in arb_value()) {
            let e = u.expand_exact(50);
            prop_assert!((e.evaluate() - u.evaluate()).abs() <= 1e-13 * magnitude(&u).max(1.0));
        }
    }

    fn magnitude(v: &ClosedFormValue) -> f64 {
        v.terms().map(|(t, c)| (c.to_f64().unwrap() * t.value()).abs()).sum()
    }
}
