//! Rational matrices sized for small certificates (tens of rows). Rank
//! is computed fraction-free: rows are scaled to integers, then Bareiss
//! one-step elimination with full pivoting runs over `BigInt`, so no
//! intermediate value is ever inexact and pivots never vanish silently.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::rational::Rational;
use super::ExactError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self, ExactError> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(ExactError::DimensionMismatch {
                context: "rows of unequal length".to_string(),
            });
        }
        Ok(RationalMatrix {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Rational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rational] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Appends one column on the right: `[self | col]`.
    pub fn augment_column(&self, col: &[Rational]) -> Result<Self, ExactError> {
        if col.len() != self.rows {
            return Err(ExactError::DimensionMismatch {
                context: format!("column of length {} against {} rows", col.len(), self.rows),
            });
        }
        let mut out = RationalMatrix::zeros(self.rows, self.cols + 1);
        for (r, extra) in col.iter().enumerate() {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).clone());
            }
            out.set(r, self.cols, extra.clone());
        }
        Ok(out)
    }

    /// Stacks `below` underneath `self`.
    pub fn stack(&self, below: &RationalMatrix) -> Result<Self, ExactError> {
        if below.cols != self.cols && below.rows != 0 {
            return Err(ExactError::DimensionMismatch {
                context: format!("stacking {} columns under {}", below.cols, self.cols),
            });
        }
        let mut data = self.data.clone();
        data.extend(below.data.iter().cloned());
        Ok(RationalMatrix {
            rows: self.rows + below.rows,
            cols: self.cols,
            data,
        })
    }

    /// Exact rank by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut m = self.to_scaled_integers();
        let (rows, cols) = (self.rows, self.cols);
        let mut prev = BigInt::one();
        let mut step = 0;
        while step < rows.min(cols) {
            let Some((pr, pc)) = pivot_position(&m, rows, cols, step) else {
                break;
            };
            m.swap_rows(rows, cols, step, pr);
            m.swap_cols(rows, cols, step, pc);
            let pivot = m.0[step * cols + step].clone();
            for i in step + 1..rows {
                for j in step + 1..cols {
                    let num = &m.0[i * cols + j] * &pivot - &m.0[i * cols + step] * &m.0[step * cols + j];
                    let (q, r) = num.div_rem(&prev);
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    m.0[i * cols + j] = q;
                }
                m.0[i * cols + step] = BigInt::zero();
            }
            prev = pivot;
            step += 1;
        }
        step
    }

    /// Solves the square system `self * x = rhs` by Gaussian elimination
    /// over the rationals.
    pub fn solve(&self, rhs: &[Rational]) -> Result<Vec<Rational>, ExactError> {
        if self.rows != self.cols {
            return Err(ExactError::DimensionMismatch {
                context: format!("solve on {}x{} matrix", self.rows, self.cols),
            });
        }
        if rhs.len() != self.rows {
            return Err(ExactError::DimensionMismatch {
                context: format!("rhs of length {} against {} rows", rhs.len(), self.rows),
            });
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot_row = (col..n)
                .find(|&r| !a[r * n + col].is_zero())
                .ok_or(ExactError::SingularMatrix)?;
            if pivot_row != col {
                for j in 0..n {
                    a.swap(col * n + j, pivot_row * n + j);
                }
                b.swap(col, pivot_row);
            }
            let pivot = a[col * n + col].clone();
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &pivot;
                for j in col..n {
                    let delta = &factor * &a[col * n + j];
                    a[r * n + j] -= delta;
                }
                let delta = &factor * &b[col];
                b[r] -= delta;
            }
        }
        let mut x = vec![Rational::zero(); n];
        for col in (0..n).rev() {
            let mut acc = b[col].clone();
            for j in col + 1..n {
                acc -= &a[col * n + j] * &x[j];
            }
            x[col] = acc / &a[col * n + col];
        }
        Ok(x)
    }

    /// Clears denominators row by row; row scaling by a positive integer
    /// does not change the rank.
    fn to_scaled_integers(&self) -> IntBuf {
        let mut out = Vec::with_capacity(self.data.len());
        for r in 0..self.rows {
            let mut lcm = BigInt::one();
            for c in 0..self.cols {
                lcm = lcm.lcm(self.get(r, c).denom());
            }
            for c in 0..self.cols {
                let v = self.get(r, c);
                out.push(v.numer() * (&lcm / v.denom()));
            }
        }
        IntBuf(out)
    }
}

struct IntBuf(Vec<BigInt>);

impl IntBuf {
    fn swap_rows(&mut self, _rows: usize, cols: usize, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..cols {
            self.0.swap(a * cols + j, b * cols + j);
        }
    }

    fn swap_cols(&mut self, rows: usize, cols: usize, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..rows {
            self.0.swap(i * cols + a, i * cols + b);
        }
    }
}

/// Smallest-magnitude nonzero entry of the trailing submatrix, which
/// keeps Bareiss intermediates modest.
fn pivot_position(m: &IntBuf, rows: usize, cols: usize, step: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in step..rows {
        for j in step..cols {
            let v = &m.0[i * cols + j];
            if v.is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if m.0[bi * cols + bj].abs() <= v.abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::super::rational::rat;
    use super::*;

    fn mat(rows: &[&[(i64, i64)]]) -> RationalMatrix {
        RationalMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn rank_of_diagonal_and_zero_matrices() {
        assert_eq!(mat(&[&[(3, 1), (0, 1)], &[(0, 1), (1, 1)]]).rank(), 2);
        assert_eq!(RationalMatrix::zeros(3, 4).rank(), 0);
        assert_eq!(RationalMatrix::zeros(0, 5).rank(), 0);
    }

    #[test]
    fn rank_detects_dependent_rows() {
        let m = mat(&[
            &[(1, 2), (1, 1), (0, 1)],
            &[(1, 1), (2, 1), (0, 1)],
            &[(0, 1), (0, 1), (5, 7)],
        ]);
        assert_eq!(m.rank(), 2);
    }

    #[test]
    fn rank_of_lower_triangular_certificate_matrix() {
        // [[2k,0,0],[k^2,k,0],[0,0,1]] has full rank for k >= 1
        for k in 1..=5i64 {
            let m = mat(&[
                &[(2 * k, 1), (0, 1), (0, 1)],
                &[(k * k, 1), (k, 1), (0, 1)],
                &[(0, 1), (0, 1), (1, 1)],
            ]);
            assert_eq!(m.rank(), 3, "k = {k}");
        }
    }

    #[test]
    fn solve_lower_triangular_system() {
        // [[6,0,0],[9,3,0],[0,0,1]] c = [12/7, 9/7, 1]
        let m = mat(&[
            &[(6, 1), (0, 1), (0, 1)],
            &[(9, 1), (3, 1), (0, 1)],
            &[(0, 1), (0, 1), (1, 1)],
        ]);
        let x = m.solve(&[rat(12, 7), rat(9, 7), rat(1, 1)]).unwrap();
        assert_eq!(x, vec![rat(2, 7), rat(-3, 7), rat(1, 1)]);
    }

    #[test]
    fn solve_reports_singular_matrix() {
        let m = mat(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]]);
        assert_eq!(m.solve(&[rat(1, 1), rat(2, 1)]), Err(ExactError::SingularMatrix));
    }

    #[test]
    fn augment_and_stack_shapes() {
        let a = mat(&[&[(1, 1), (0, 1)], &[(0, 1), (1, 1)]]);
        let ab = a.augment_column(&[rat(5, 1), rat(6, 1)]).unwrap();
        assert_eq!((ab.rows(), ab.cols()), (2, 3));
        assert_eq!(ab.get(1, 2), &rat(6, 1));
        let b = mat(&[&[(7, 1), (8, 1), (9, 1)]]);
        let stacked = ab.stack(&b).unwrap();
        assert_eq!((stacked.rows(), stacked.cols()), (3, 3));
        assert_eq!(stacked.get(2, 0), &rat(7, 1));
        assert!(a.stack(&b).is_err());
        assert!(a.augment_column(&[rat(1, 1)]).is_err());
    }

    #[test]
    fn rank_unchanged_by_row_scaling_example() {
        let m = mat(&[&[(1, 3), (2, 3)], &[(5, 1), (10, 1)]]);
        assert_eq!(m.rank(), 1);
    }
}
