//! Dense row-major matrices over real or complex entries.
//!
//! State counts here are small (tens, not thousands), so the representation
//! favors clarity over blocking: contiguous storage and explicit loops.
//! The norm of record is the maximum absolute row sum, which is the operator
//! norm both for the action on measures (variation norm) and on observables
//! (supremum norm).

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Entry, Scalar};

/// Dense rectangular matrix with row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<T> {
    nrows: usize,
    ncols: usize,
    data: Vec<T>,
}

impl<T: Entry> Mat<T> {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat { nrows, ncols, data: vec![T::zero(); nrows * ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    /// Builds from nested rows; all rows must share one length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidInput("matrix needs at least one row".into()));
        }
        let ncols = rows[0].len();
        if ncols == 0 {
            return Err(Error::InvalidInput("matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { nrows: rows.len(), ncols, data })
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(nrows * ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                data.push(f(i, j));
            }
        }
        Mat { nrows, ncols, data }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.ncols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.ncols + j] = v;
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.ncols, rhs.nrows, "inner dimensions must agree");
        let mut out = Mat::zeros(self.nrows, rhs.ncols);
        for i in 0..self.nrows {
            for k in 0..self.ncols {
                let a = self.data[i * self.ncols + k];
                if a == T::zero() {
                    continue;
                }
                let lhs_row = i * rhs.ncols;
                let rhs_row = k * rhs.ncols;
                for j in 0..rhs.ncols {
                    out.data[lhs_row + j] += a * rhs.data[rhs_row + j];
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect();
        Mat { nrows: self.nrows, ncols: self.ncols, data }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect();
        Mat { nrows: self.nrows, ncols: self.ncols, data }
    }

    pub fn scale(&self, c: T) -> Self {
        let data = self.data.iter().map(|&a| a * c).collect();
        Mat { nrows: self.nrows, ncols: self.ncols, data }
    }

    /// In-place `self += c * rhs`.
    pub fn add_assign_scaled(&mut self, rhs: &Self, c: T) {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += c * b;
        }
    }

    /// In-place rank-one update `self += c * u w^T`.
    pub fn add_outer(&mut self, c: T, u: &[T], w: &[T]) {
        assert_eq!(u.len(), self.nrows);
        assert_eq!(w.len(), self.ncols);
        for i in 0..self.nrows {
            let cu = c * u[i];
            if cu == T::zero() {
                continue;
            }
            let base = i * self.ncols;
            for j in 0..self.ncols {
                self.data[base + j] += cu * w[j];
            }
        }
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat {
            nrows: self.nrows,
            ncols: self.ncols,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self.get(j, i))
    }

    /// Matrix power by binary exponentiation; `pow(0)` is the identity.
    pub fn pow(&self, n: u64) -> Self {
        assert_eq!(self.nrows, self.ncols, "powers need a square matrix");
        let mut result = Mat::identity(self.nrows);
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.matmul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    /// Maximum absolute row sum: the operator norm on measures and observables.
    pub fn sup_row_norm(&self) -> T::Real {
        let mut best = T::Real::zero();
        for i in 0..self.nrows {
            let mut sum = T::Real::zero();
            for j in 0..self.ncols {
                sum = sum + self.get(i, j).modulus();
            }
            if sum > best {
                best = sum;
            }
        }
        best
    }

    /// Operator-norm distance to another matrix of the same shape.
    pub fn row_distance(&self, rhs: &Self) -> T::Real {
        assert_eq!((self.nrows, self.ncols), (rhs.nrows, rhs.ncols));
        let mut best = T::Real::zero();
        for i in 0..self.nrows {
            let mut sum = T::Real::zero();
            for j in 0..self.ncols {
                sum = sum + (self.get(i, j) - rhs.get(i, j)).modulus();
            }
            if sum > best {
                best = sum;
            }
        }
        best
    }

    pub fn max_abs(&self) -> T::Real {
        let mut best = T::Real::zero();
        for &v in &self.data {
            let m = v.modulus();
            if m > best {
                best = m;
            }
        }
        best
    }

    pub fn max_imag_abs(&self) -> T::Real {
        let mut best = T::Real::zero();
        for &v in &self.data {
            let m = v.imag_part().modulus();
            if m > best {
                best = m;
            }
        }
        best
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.nrows)
            .map(|i| {
                let mut s = T::zero();
                for j in 0..self.ncols {
                    s += self.get(i, j);
                }
                s
            })
            .collect()
    }

    /// Row vector times matrix: `v^T A`.
    pub fn left_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.nrows);
        let mut out = vec![T::zero(); self.ncols];
        for i in 0..self.nrows {
            let c = v[i];
            if c == T::zero() {
                continue;
            }
            let base = i * self.ncols;
            for j in 0..self.ncols {
                out[j] += c * self.data[base + j];
            }
        }
        out
    }

    /// Matrix times column vector: `A v`.
    pub fn right_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.ncols);
        (0..self.nrows)
            .map(|i| {
                let mut s = T::zero();
                let base = i * self.ncols;
                for j in 0..self.ncols {
                    s += self.data[base + j] * v[j];
                }
                s
            })
            .collect()
    }
}

/// Lifts a real matrix into the complex plane.
pub fn complexify<S: Scalar>(m: &Mat<S>) -> Mat<Complex<S>> {
    m.map(|v| Complex::new(v, S::zero()))
}

/// Real part plus the largest imaginary residue left behind.
pub fn realify<S: Scalar>(m: &Mat<Complex<S>>) -> (Mat<S>, S) {
    (m.map(|v| v.re), m.max_imag_abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn swap() -> Mat<f64> {
        Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    #[test]
    fn identity_is_multiplicative_unit() {
        let m = swap();
        assert_eq!(m.matmul(&Mat::identity(2)), m);
        assert_eq!(Mat::identity(2).matmul(&m), m);
    }

    #[test]
    fn power_of_involution_alternates() {
        let m = swap();
        assert_eq!(m.pow(0), Mat::identity(2));
        assert_eq!(m.pow(2), Mat::identity(2));
        assert_eq!(m.pow(5), m);
    }

    #[test]
    fn sup_row_norm_is_max_abs_row_sum() {
        let m = Mat::from_rows(&[vec![0.5, -0.25], vec![1.0, 1.5]]).unwrap();
        assert_eq!(m.sup_row_norm(), 2.5);
        assert_eq!(m.row_distance(&Mat::zeros(2, 2)), 2.5);
    }

    #[test]
    fn left_mul_is_row_vector_action() {
        let m = Mat::from_rows(&[vec![0.6f64, 0.4], vec![0.3, 0.7]]).unwrap();
        let out = m.left_mul(&[0.5, 0.5]);
        assert!((out[0] - 0.45).abs() < 1e-15 && (out[1] - 0.55).abs() < 1e-15);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let err = Mat::from_rows(&[vec![1.0], vec![1.0, 2.0]]);
        assert!(err.is_err(), "ragged input must not build a matrix");
    }
}
