//! Markov kernels, signed measures, and observables on a finite state space.
//!
//! A kernel p assigns each state x a probability distribution p(x, .) over
//! next states; finitely many states make p a row-stochastic matrix. The
//! kernel acts on measures from the right, (T mu)(y) = sum_x mu(x) p(x, y),
//! and on observables from the left, (T* l)(x) = sum_y p(x, y) l(y). The two
//! actions are dual: <mu, T* l> = <T mu, l> holds exactly in exact
//! arithmetic, and [`MarkovKernel::duality_gap`] exposes the floating-point
//! residue of that identity as a testable quantity.
//!
//! Norms: measures carry the variation norm (sum of absolute weights),
//! observables the supremum norm. Both induced operator norms of T equal the
//! maximum absolute row sum, so one matrix norm serves throughout; it is
//! also the distance used by [`MarkovKernel::distance`].
//!
//! Tolerances: strict constructors demand row sums within
//! [`Scalar::STOCHASTIC_TOL`] of 1; renormalizing constructors accept rows
//! off by up to [`Scalar::RENORMALIZE_TOL`] and divide the drift out, which
//! tolerates file round-trip noise without hiding modeling errors.

use crate::error::{Error, Result};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::space::StateSpace;

/// Row-stochastic transition kernel over a labeled state space.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovKernel<S: Scalar> {
    space: StateSpace,
    mat: Mat<S>,
}

/// Signed measure: one real weight per state, variation norm = sum of
/// absolute weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedMeasure<S: Scalar> {
    space: StateSpace,
    weights: Vec<S>,
}

/// Bounded observable: one real value per state, supremum norm.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable<S: Scalar> {
    space: StateSpace,
    values: Vec<S>,
}

fn check_finite<S: Scalar>(v: S, what: &str) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} must be finite, got {v}")))
    }
}

impl<S: Scalar> MarkovKernel<S> {
    /// Strict constructor: entries in [0, 1], row sums within
    /// `STOCHASTIC_TOL` of 1. Entries within the tolerance below zero are
    /// clamped to zero (arithmetic residue, not modeling error).
    pub fn new(space: StateSpace, mat: Mat<S>) -> Result<Self> {
        Self::build(space, mat, S::STOCHASTIC_TOL, false)
    }

    /// Renormalizing constructor: accepts rows within `RENORMALIZE_TOL`
    /// of stochastic and divides each row by its sum.
    pub fn new_renormalized(space: StateSpace, mat: Mat<S>) -> Result<Self> {
        Self::build(space, mat, S::RENORMALIZE_TOL, true)
    }

    /// Strict constructor from nested rows.
    pub fn from_rows(space: StateSpace, rows: &[Vec<S>]) -> Result<Self> {
        Self::new(space, Mat::from_rows(rows)?)
    }

    fn build(space: StateSpace, mut mat: Mat<S>, tol: S, renormalize: bool) -> Result<Self> {
        let n = space.size();
        if mat.nrows() != n || mat.ncols() != n {
            return Err(Error::InvalidInput(format!(
                "kernel matrix is {}x{}, state space has {n} states",
                mat.nrows(),
                mat.ncols()
            )));
        }
        for i in 0..n {
            let mut sum = S::zero();
            for j in 0..n {
                let v = mat.get(i, j);
                check_finite(v, "kernel entry")?;
                if v < S::zero() {
                    if v >= -tol {
                        mat.set(i, j, S::zero());
                    } else {
                        return Err(Error::NonStochasticRow {
                            row: i,
                            detail: format!("negative entry {v} at column {j}"),
                        });
                    }
                } else if v > S::one() + tol {
                    return Err(Error::NonStochasticRow {
                        row: i,
                        detail: format!("entry {v} at column {j} exceeds 1"),
                    });
                }
                sum = sum + mat.get(i, j);
            }
            let drift = (sum - S::one()).abs();
            if drift > tol {
                return Err(Error::NonStochasticRow {
                    row: i,
                    detail: format!("sum deviates from 1 by {:e}", drift.to_f64().unwrap_or(f64::NAN)),
                });
            }
            if renormalize && sum != S::one() {
                for j in 0..n {
                    let v = mat.get(i, j) / sum;
                    mat.set(i, j, v);
                }
            }
        }
        Ok(MarkovKernel { space, mat })
    }

    /// Identity kernel: every state maps to itself.
    pub fn identity(space: StateSpace) -> Self {
        let mat = Mat::identity(space.size());
        MarkovKernel { space, mat }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn size(&self) -> usize {
        self.space.size()
    }

    pub fn matrix(&self) -> &Mat<S> {
        &self.mat
    }

    /// Transition probability p(x, y) by index.
    pub fn prob(&self, x: usize, y: usize) -> S {
        self.mat.get(x, y)
    }

    /// Action on measures: result(y) = sum_x mu(x) p(x, y). Preserves total
    /// mass and maps probability measures to probability measures.
    pub fn apply_measure(&self, mu: &SignedMeasure<S>) -> Result<SignedMeasure<S>> {
        self.space.check_same(&mu.space, "apply_measure")?;
        Ok(SignedMeasure { space: self.space.clone(), weights: self.mat.left_mul(&mu.weights) })
    }

    /// Dual action on observables: result(x) = sum_y p(x, y) l(y). Constant
    /// observables are fixed points.
    pub fn apply_observable(&self, l: &Observable<S>) -> Result<Observable<S>> {
        self.space.check_same(&l.space, "apply_observable")?;
        Ok(Observable { space: self.space.clone(), values: self.mat.right_mul(&l.values) })
    }

    /// n-step kernel p^(n); n = 0 is the identity.
    pub fn n_step(&self, n: u64) -> MarkovKernel<S> {
        let mat = self.mat.pow(n);
        // Powers of stochastic matrices stay stochastic up to accumulation
        // drift far below the renormalizing tolerance.
        MarkovKernel::new_renormalized(self.space.clone(), mat)
            .expect("power of a stochastic matrix drifted past tolerance")
    }

    /// Cesaro average of kernel powers: (1/n) sum of p^(i) with i in 1..=n,
    /// or i in 0..n when `include_zeroth` is set. Rows remain stochastic.
    /// Summation is compensated so long averages do not lose precision.
    pub fn cesaro_average(&self, n: u64, include_zeroth: bool) -> Mat<S> {
        assert!(n >= 1, "cesaro_average needs n >= 1");
        let size = self.size();
        let mut acc = Mat::<S>::zeros(size, size);
        let mut comp = Mat::<S>::zeros(size, size);
        let mut cur = if include_zeroth { Mat::identity(size) } else { self.mat.clone() };
        for step in 0..n {
            // Kahan step: acc += cur with carried compensation.
            for i in 0..size {
                for j in 0..size {
                    let y = cur.get(i, j) - comp.get(i, j);
                    let t = acc.get(i, j) + y;
                    comp.set(i, j, (t - acc.get(i, j)) - y);
                    acc.set(i, j, t);
                }
            }
            if step + 1 < n {
                cur = cur.matmul(&self.mat);
            }
        }
        acc.scale(S::one() / S::from_u64(n).unwrap())
    }

    /// Floating-point residue of the duality identity
    /// |<mu, T* l> - <T mu, l>|; zero in exact arithmetic.
    pub fn duality_gap(&self, mu: &SignedMeasure<S>, l: &Observable<S>) -> Result<S> {
        let lhs = mu.integrate(&self.apply_observable(l)?)?;
        let rhs = self.apply_measure(mu)?.integrate(l)?;
        Ok((lhs - rhs).abs())
    }

    /// Operator-norm distance: max over x of the variation distance between
    /// the rows a(x, .) and b(x, .).
    pub fn distance(&self, other: &MarkovKernel<S>) -> Result<S> {
        self.space.check_same(&other.space, "kernel_distance")?;
        Ok(self.mat.row_distance(&other.mat))
    }
}

impl<S: Scalar> SignedMeasure<S> {
    pub fn new(space: StateSpace, weights: Vec<S>) -> Result<Self> {
        if weights.len() != space.size() {
            return Err(Error::InvalidInput(format!(
                "measure has {} weights, state space has {} states",
                weights.len(),
                space.size()
            )));
        }
        for &w in &weights {
            check_finite(w, "measure weight")?;
        }
        Ok(SignedMeasure { space, weights })
    }

    /// Unit mass at one state.
    pub fn point_mass(space: StateSpace, label: &str) -> Result<Self> {
        let idx = space.require(label)?;
        let mut weights = vec![S::zero(); space.size()];
        weights[idx] = S::one();
        Ok(SignedMeasure { space, weights })
    }

    /// Uniform probability measure.
    pub fn uniform(space: StateSpace) -> Self {
        let w = S::one() / S::from_usize(space.size()).unwrap();
        let weights = vec![w; space.size()];
        SignedMeasure { space, weights }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> S {
        self.weights[i]
    }

    /// Variation norm: sum of absolute weights.
    pub fn variation_norm(&self) -> S {
        self.weights.iter().fold(S::zero(), |a, &w| a + w.abs())
    }

    pub fn total_mass(&self) -> S {
        self.weights.iter().fold(S::zero(), |a, &w| a + w)
    }

    /// Probability check: nonnegative weights, total mass 1, both within
    /// the strict stochastic tolerance.
    pub fn is_probability(&self) -> bool {
        self.weights.iter().all(|&w| w >= -S::STOCHASTIC_TOL)
            && (self.total_mass() - S::one()).abs() <= S::STOCHASTIC_TOL
    }

    /// Pairing <mu, l> = sum_x mu(x) l(x).
    pub fn integrate(&self, l: &Observable<S>) -> Result<S> {
        self.space.check_same(&l.space, "integrate")?;
        let mut s = S::zero();
        for (w, v) in self.weights.iter().zip(&l.values) {
            s = s + *w * *v;
        }
        Ok(s)
    }

    /// Mass of a subset given by indices.
    pub fn mass_of(&self, indices: &[usize]) -> S {
        indices.iter().fold(S::zero(), |a, &i| a + self.weights[i])
    }

    /// Variation distance to another measure on the same space.
    pub fn variation_distance(&self, other: &SignedMeasure<S>) -> Result<S> {
        self.space.check_same(&other.space, "variation_distance")?;
        let mut s = S::zero();
        for (a, b) in self.weights.iter().zip(&other.weights) {
            s = s + (*a - *b).abs();
        }
        Ok(s)
    }
}

impl<S: Scalar> Observable<S> {
    pub fn new(space: StateSpace, values: Vec<S>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::InvalidInput(format!(
                "observable has {} values, state space has {} states",
                values.len(),
                space.size()
            )));
        }
        for &v in &values {
            check_finite(v, "observable value")?;
        }
        Ok(Observable { space, values })
    }

    /// Constant observable.
    pub fn constant(space: StateSpace, c: S) -> Self {
        let values = vec![c; space.size()];
        Observable { space, values }
    }

    /// Indicator of a subset given by indices.
    pub fn indicator(space: StateSpace, indices: &[usize]) -> Self {
        let mut values = vec![S::zero(); space.size()];
        for &i in indices {
            values[i] = S::one();
        }
        Observable { space, values }
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn value(&self, i: usize) -> S {
        self.values[i]
    }

    /// Supremum norm: largest absolute value.
    pub fn sup_norm(&self) -> S {
        self.values.iter().fold(S::zero(), |a, &v| {
            let m = v.abs();
            if m > a {
                m
            } else {
                a
            }
        })
    }
}
