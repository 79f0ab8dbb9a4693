//! Exact rational scalars and dense rational matrices.
//!
//! Every number in the crate is a [`Rational`]: an arbitrary-precision
//! fraction kept in lowest terms with a positive denominator. No operation
//! in this crate rounds.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{mismatch, Error, Result};

/// Arbitrary-precision rational number, always normalized.
pub type Rational = BigRational;

/// Integer-valued rational.
pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

/// `numer / denom` reduced to lowest terms. Panics on a zero denominator.
pub fn frac(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses the file representation `"p/q"` or `"p"`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Err(Error::Parse("empty rational literal".into()));
    }
    Rational::from_str(trimmed).map_err(|_| Error::Parse(format!("bad rational literal {text:?}")))
}

/// Canonical file representation: `"p/q"` in lowest terms, `"p"` when `q = 1`.
pub fn format_rational(value: &Rational) -> String {
    value.to_string()
}

/// `⟨c, x⟩` for a binary `x`.
pub fn inner_binary(coeffs: &[Rational], bits: &[bool]) -> Rational {
    coeffs
        .iter()
        .zip(bits)
        .filter(|(_, &b)| b)
        .fold(Rational::zero(), |acc, (c, _)| acc + c)
}

/// `⟨a, b⟩` for rational vectors of equal length.
pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn scale(vector: &[Rational], factor: &Rational) -> Vec<Rational> {
    vector.iter().map(|v| v * factor).collect()
}

pub fn is_zero_vector(vector: &[Rational]) -> bool {
    vector.iter().all(Zero::is_zero)
}

/// Dense row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, Rational::one());
        }
        m
    }

    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Rational>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(mismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a matrix from row vectors; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let count = rows.len();
        let mut entries = Vec::with_capacity(count * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(mismatch(format!("row {i} has {} entries, expected {cols}", row.len())));
            }
            entries.extend(row);
        }
        Ok(Self {
            rows: count,
            cols,
            entries,
        })
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        let rows = rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        Self::from_rows(rows).expect("ragged literal matrix")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> &Rational {
        &self.entries[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Rational) {
        self.entries[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.entries[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<Rational> {
        (0..self.rows).map(|i| self.get(i, col).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(mismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.entries[idx] = &out.entries[idx] + a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        is_zero_vector(&self.entries)
    }

    /// `xᵀ M y` for binary `x`, `y`.
    pub fn bilinear_binary(&self, x: &[bool], y: &[bool]) -> Rational {
        let mut acc = Rational::zero();
        for (i, _) in x.iter().enumerate().filter(|(_, &b)| b) {
            acc += inner_binary(self.row(i), y);
        }
        acc
    }

    /// Reduced row echelon form and the pivot column of each nonzero row.
    ///
    /// Pivot choice is the first nonzero entry at or below the current row.
    pub fn reduced_row_echelon(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, p);
            let inv = m.get(row, col).recip();
            for j in col..m.cols {
                let v = m.get(row, j) * &inv;
                m.set(row, j, v);
            }
            for r in 0..m.rows {
                if r == row {
                    continue;
                }
                let factor = m.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for j in col..m.cols {
                    let v = m.get(r, j) - &factor * m.get(row, j);
                    m.set(r, j, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.reduced_row_echelon().1.len()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl fmt::Display for RationalMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(format_rational).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// `M = A·Bᵀ` with `A` of shape m×r, `B` of shape n×r and `r = rank(M)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankFactorization {
    pub left: RationalMatrix,
    pub right: RationalMatrix,
    pub rank: usize,
}

impl RankFactorization {
    /// Columns `(aⁱ, bⁱ)` of the two factors, so that `M = Σ aⁱ ⊗ bⁱ`.
    pub fn outer_pairs(&self) -> Vec<(Vec<Rational>, Vec<Rational>)> {
        (0..self.rank)
            .map(|i| (self.left.column(i), self.right.column(i)))
            .collect()
    }

    pub fn product(&self) -> RationalMatrix {
        self.left
            .mul(&self.right.transpose())
            .expect("factor shapes agree by construction")
    }
}

/// Rank factorization by Gauss-Jordan elimination.
///
/// `A` holds the pivot columns of `M`; `B` holds the nonzero rows of the
/// reduced row echelon form, transposed.
pub fn rank_factorization(matrix: &RationalMatrix) -> RankFactorization {
    let (rref, pivots) = matrix.reduced_row_echelon();
    let rank = pivots.len();
    let mut left = RationalMatrix::zeros(matrix.rows(), rank);
    for (p, &col) in pivots.iter().enumerate() {
        for i in 0..matrix.rows() {
            left.set(i, p, matrix.get(i, col).clone());
        }
    }
    let mut right = RationalMatrix::zeros(matrix.cols(), rank);
    for p in 0..rank {
        for j in 0..matrix.cols() {
            right.set(j, p, rref.get(p, j).clone());
        }
    }
    RankFactorization { left, right, rank }
}

pub(crate) fn abs(value: &Rational) -> Rational {
    value.abs()
}
