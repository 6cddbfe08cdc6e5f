//! Dense LU solves with partial pivoting, generic over real and complex
//! entries. Everything downstream (stationary distributions, absorption
//! probabilities, transient extensions of eigenvectors, stochastic
//! complements) reduces to one of these two entry points.

use num_traits::{Float, FromPrimitive, One, ToPrimitive};

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Entry;

struct LuFactors<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
}

fn factor<T: Entry>(a: &Mat<T>) -> Result<LuFactors<T>> {
    assert_eq!(a.nrows(), a.ncols(), "LU factorization needs a square matrix");
    let n = a.nrows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    // Pivots below this count as zero: relative to the matrix scale.
    let scale = if a.max_abs() > T::Real::one() { a.max_abs() } else { T::Real::one() };
    let tiny = T::Real::epsilon() * T::Real::from_usize(n * 4).unwrap() * scale;

    for k in 0..n {
        let mut pivot_row = k;
        let mut pivot_mag = lu.get(k, k).modulus();
        for r in (k + 1)..n {
            let mag = lu.get(r, k).modulus();
            if mag > pivot_mag {
                pivot_mag = mag;
                pivot_row = r;
            }
        }
        if pivot_mag <= tiny {
            let mag = pivot_mag.to_f64().unwrap_or(f64::NAN);
            return Err(Error::SingularSystem(format!(
                "pivot {mag:e} at column {k} of a {n}x{n} system"
            )));
        }
        if pivot_row != k {
            for j in 0..n {
                let tmp = lu.get(k, j);
                lu.set(k, j, lu.get(pivot_row, j));
                lu.set(pivot_row, j, tmp);
            }
            perm.swap(k, pivot_row);
        }
        let pivot = lu.get(k, k);
        for r in (k + 1)..n {
            let m = lu.get(r, k) / pivot;
            lu.set(r, k, m);
            if m == T::zero() {
                continue;
            }
            for j in (k + 1)..n {
                let v = lu.get(r, j) - m * lu.get(k, j);
                lu.set(r, j, v);
            }
        }
    }
    Ok(LuFactors { lu, perm })
}

fn solve_factored<T: Entry>(f: &LuFactors<T>, rhs: &[T]) -> Vec<T> {
    let n = f.lu.nrows();
    // Forward substitution on the permuted right-hand side.
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut s = rhs[f.perm[i]];
        for j in 0..i {
            s -= f.lu.get(i, j) * y[j];
        }
        y[i] = s;
    }
    // Back substitution.
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for j in (i + 1)..n {
            s -= f.lu.get(i, j) * x[j];
        }
        x[i] = s / f.lu.get(i, i);
    }
    x
}

/// Solves `A x = b` for a single right-hand side.
pub fn solve_vec<T: Entry>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    assert_eq!(a.nrows(), b.len(), "right-hand side length must match");
    let f = factor(a)?;
    Ok(solve_factored(&f, b))
}

/// Solves `A X = B` column by column.
pub fn solve<T: Entry>(a: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    assert_eq!(a.nrows(), b.nrows(), "right-hand side height must match");
    let f = factor(a)?;
    let mut out = Mat::zeros(b.nrows(), b.ncols());
    let mut col = vec![T::zero(); b.nrows()];
    for j in 0..b.ncols() {
        for i in 0..b.nrows() {
            col[i] = b.get(i, j);
        }
        let x = solve_factored(&f, &col);
        for i in 0..b.nrows() {
            out.set(i, j, x[i]);
        }
    }
    Ok(out)
}
