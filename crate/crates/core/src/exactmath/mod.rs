//! Exact arithmetic building blocks: arbitrary-precision rationals,
//! dense rational polynomials, and rational matrices with fraction-free
//! rank computation. Nothing in this module ever rounds.

pub mod matrix;
pub mod polynomial;
pub mod rational;

pub use matrix::RationalMatrix;
pub use polynomial::{interpolate, Polynomial};
pub use rational::{checked_div, format_rational, parse_rational, rat, Rational};

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse rational from {input:?}")]
    ParseRational { input: String },
    #[error("duplicate interpolation abscissa {x}")]
    DuplicateAbscissa { x: Rational },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
}

/// Binomial coefficient C(n, k) as an exact rational (integer-valued).
pub fn binomial(n: usize, k: usize) -> Rational {
    Rational::from_integer(num_integer::binomial(BigInt::from(n), BigInt::from(k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), rat(6, 1));
        assert_eq!(binomial(5, 0), rat(1, 1));
        assert_eq!(binomial(3, 3), rat(1, 1));
        assert_eq!(binomial(2, 5), rat(0, 1));
    }
}
