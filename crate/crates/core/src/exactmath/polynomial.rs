//! Dense univariate polynomials over `Rational`, stored by ascending
//! coefficients with no trailing zeros (the zero polynomial is empty).

use std::fmt;
use std::ops::{Add, Sub};

use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use super::ExactError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: Rational) -> Self {
        Polynomial::from_coeffs(vec![c])
    }

    /// Builds from ascending coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// Ascending coefficients; empty slice for the zero polynomial.
    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of x^k (zero beyond the stored degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    /// Horner evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Evaluation at a machine integer (handy for index arguments).
    pub fn eval_int(&self, n: i64) -> Rational {
        self.eval(&Rational::from_integer(n.into()))
    }

    /// The composed polynomial p(x + k).
    pub fn shift(&self, k: &Rational) -> Polynomial {
        let mut acc: Vec<Rational> = Vec::with_capacity(self.coeffs.len());
        for c in self.coeffs.iter().rev() {
            // acc := acc * (x + k) + c
            let mut next = vec![Rational::zero(); acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i + 1] += a;
                next[i] += a * k;
            }
            if next.is_empty() {
                next.push(Rational::zero());
            }
            next[0] += c;
            acc = next;
        }
        Polynomial::from_coeffs(acc)
    }

    /// p(x + 1) - p(x); drops the degree by exactly one for
    /// non-constant p.
    pub fn forward_difference(&self) -> Polynomial {
        &self.shift(&Rational::one()) - self
    }

    /// m-fold forward difference.
    pub fn iterated_difference(&self, m: usize) -> Polynomial {
        let mut p = self.clone();
        for _ in 0..m {
            p = p.forward_difference();
        }
        p
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        Polynomial::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect();
        Polynomial::from_coeffs(coeffs)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect();
        Polynomial::from_coeffs(coeffs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
                first = false;
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if k == 0 {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag} ")?;
                }
                if k == 1 {
                    write!(f, "x")?;
                } else {
                    write!(f, "x^{k}")?;
                }
            }
        }
        Ok(())
    }
}

/// Unique interpolating polynomial of degree < points.len() through the
/// given (x, y) pairs, by Newton divided differences.
pub fn interpolate(points: &[(Rational, Rational)]) -> Result<Polynomial, ExactError> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].0 == points[j].0 {
                return Err(ExactError::DuplicateAbscissa {
                    x: points[i].0.clone(),
                });
            }
        }
    }
    if points.is_empty() {
        return Ok(Polynomial::zero());
    }
    let xs: Vec<&Rational> = points.iter().map(|(x, _)| x).collect();
    let mut table: Vec<Rational> = points.iter().map(|(_, y)| y.clone()).collect();
    let mut newton_coeffs = vec![table[0].clone()];
    for level in 1..points.len() {
        for i in 0..points.len() - level {
            table[i] = (&table[i + 1] - &table[i]) / (xs[i + level] - xs[i]);
        }
        table.truncate(points.len() - level);
        newton_coeffs.push(table[0].clone());
    }
    // Horner over the Newton basis: p = (..(a_{n-1}(x - x_{n-2}) + a_{n-2})..)
    let mut p = Polynomial::constant(newton_coeffs.pop().unwrap());
    for (a, x) in newton_coeffs.into_iter().zip(xs).rev() {
        p = p.shift_multiply_minus(x);
        p = &p + &Polynomial::constant(a);
    }
    Ok(p)
}

impl Polynomial {
    /// p(x) * (x - r), used by the Newton basis expansion.
    fn shift_multiply_minus(&self, r: &Rational) -> Polynomial {
        let mut coeffs = vec![Rational::zero(); self.coeffs.len() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            coeffs[i + 1] += a;
            coeffs[i] -= a * r;
        }
        Polynomial::from_coeffs(coeffs)
    }
}
