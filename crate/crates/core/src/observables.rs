//! Single-mode contributions to the entropy and the capacity.
//!
//! Every function has a `_pair` variant taking `(x, 1 - x)`; quadrature
//! nodes crowd against `x = 1`, where `1 - x` cannot be recovered from `x`.

fn xlogx(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u * u.ln()
    }
}

/// `v(x) = (1-x)/2 ln((1-x)/2) + (1+x)/2 ln((1+x)/2)`, so that `S = -Σ v(x_i)`.
pub fn v(x: f64) -> f64 {
    v_pair(x, 1.0 - x)
}

pub fn v_pair(x: f64, comp: f64) -> f64 {
    xlogx(comp / 2.0) + xlogx((1.0 + x) / 2.0)
}

/// `(1-x²)/4 · ln²((1+x)/(1-x))`, zero at both ends of `[0, 1]`.
pub fn capacity_term(x: f64) -> f64 {
    capacity_term_pair(x, 1.0 - x)
}

pub fn capacity_term_pair(x: f64, comp: f64) -> f64 {
    if comp == 0.0 || x == 0.0 {
        return 0.0;
    }
    let l = (1.0 + x).ln() - comp.ln();
    comp * (1.0 + x) / 4.0 * l * l
}

/// `(1+x)/2 ln²((1+x)/2) + (1-x)/2 ln²((1-x)/2)`, the second moment of the
/// log-probabilities of one mode.
pub fn log_square_term_pair(x: f64, comp: f64) -> f64 {
    let sq = |u: f64| {
        if u == 0.0 {
            0.0
        } else {
            let l = u.ln();
            u * l * l
        }
    };
    sq((1.0 + x) / 2.0) + sq(comp / 2.0)
}

/// The capacity term written as `log_square_term - v²`.
pub fn capacity_term_rewritten_pair(x: f64, comp: f64) -> f64 {
    let v = v_pair(x, comp);
    log_square_term_pair(x, comp) - v * v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    #[test]
    fn endpoint_limits_are_exact() {
        assert_eq!(v(1.0), 0.0);
        assert_eq!(v(0.0), -LN_2);
        assert_eq!(capacity_term(0.0), 0.0);
        assert_eq!(capacity_term(1.0), 0.0);
        assert_eq!(log_square_term_pair(1.0, 0.0), 0.0);
    }

    #[test]
    fn half_examples() {
        assert_relative_eq!(-v(0.5), -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln()), max_relative = 1e-15);
        assert_relative_eq!(-v(0.5), 0.562_335_144_618_808_9, max_relative = 1e-14);
        assert_relative_eq!(capacity_term(0.5), 3.0 / 16.0 * 3f64.ln().powi(2), max_relative = 1e-15);
    }

    proptest! {
        #[test]
        fn capacity_forms_agree(x in 0.0f64..1.0) {
            let a = capacity_term_pair(x, 1.0 - x);
            let b = capacity_term_rewritten_pair(x, 1.0 - x);
            prop_assert!((a - b).abs() < 1e-14);
        }

        #[test]
        fn v_is_bounded(x in 0.0f64..=1.0) {
            let s = -v(x);
            prop_assert!((0.0..=LN_2).contains(&s));
        }
    }
}
