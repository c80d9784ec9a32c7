//! Exact rational scalars. All measures, weights, norms and certificate
//! entries in this crate are `Rational`; square roots are never taken
//! (weights are carried in squared form throughout).

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use super::ExactError;

/// Arbitrary-precision rational, always stored reduced with a positive
/// denominator (`num_rational` maintains that canonical form).
pub type Rational = num_rational::BigRational;

/// Shorthand constructor from machine integers. Panics on `d == 0`;
/// intended for literals, not for data flowing in from inputs.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"p/q"` or `"p"` (optional leading sign on the numerator).
pub fn parse_rational(input: &str) -> Result<Rational, ExactError> {
    Rational::from_str(input).map_err(|_| ExactError::ParseRational {
        input: input.to_string(),
    })
}

/// Renders as `"p/q"`, or `"p"` when the denominator is 1. Output of
/// this function always re-parses to the identical value.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Division that reports a zero divisor instead of panicking.
pub fn checked_div(a: &Rational, b: &Rational) -> Result<Rational, ExactError> {
    if b.is_zero() {
        return Err(ExactError::DivisionByZero);
    }
    Ok(a / b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn arithmetic_is_exact_and_canonical() {
        assert_eq!(rat(1, 3) + rat(1, 6), rat(1, 2));
        assert_eq!(rat(4, 7) * rat(49, 242), rat(14, 121));
        assert_eq!(rat(1, 2) - rat(1, 2), Rational::zero());
        assert_eq!(checked_div(&rat(3, 4), &rat(3, 4)).unwrap(), Rational::one());
    }

    #[test]
    fn negative_denominators_normalize() {
        assert_eq!(rat(1, -2), rat(-1, 2));
        assert_eq!(rat(-2, -4), rat(1, 2));
    }

    #[test]
    fn parse_accepts_both_forms() {
        assert_eq!(parse_rational("4/7").unwrap(), rat(4, 7));
        assert_eq!(parse_rational("5").unwrap(), rat(5, 1));
        assert_eq!(parse_rational("-2/3").unwrap(), rat(-2, 3));
        assert_eq!(parse_rational("2/4").unwrap(), rat(1, 2));
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn format_round_trips() {
        for r in [rat(0, 1), rat(5, 1), rat(-5, 1), rat(4, 7), rat(-49, 1936)] {
            assert_eq!(parse_rational(&format_rational(&r)).unwrap(), r);
        }
        assert_eq!(format_rational(&rat(3, 1)), "3");
        assert_eq!(format_rational(&rat(0, 1)), "0");
        assert_eq!(format_rational(&rat(-14, 121)), "-14/121");
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(
            checked_div(&rat(1, 1), &Rational::zero()),
            Err(ExactError::DivisionByZero)
        );
    }
}
