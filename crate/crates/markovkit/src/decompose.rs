//! Ergodic decomposition of a finite Markov kernel.
//!
//! Every finite kernel splits the state space into closed recurrent classes
//! E_alpha plus a transient remainder Delta. Each class carries a unique
//! invariant probability measure nu_alpha (supported on the class), and each
//! class has an absorption eigenfunction y_alpha with T* y_alpha = y_alpha:
//! y_alpha(x) is the probability of ending up in E_alpha when starting from
//! x, so y_alpha is 1 on the class, 0 on the other classes, and solves a
//! linear system on Delta. The eigenfunctions are a partition of unity and
//! are biorthogonal to the invariant measures.
//!
//! The Cesaro averages (1/n) sum of p^(i) converge at rate M/n to the limit
//! kernel p1(x, .) = sum_alpha y_alpha(x) nu_alpha(.), a projection that
//! commutes with p. The limit of the Cesaro iterates of any initial
//! probability measure mu is sum_alpha <mu, y_alpha> nu_alpha; the
//! coefficient reduces to mu(E_alpha) whenever mu puts no mass on Delta,
//! and the integral form is the one the brute-force iteration oracle
//! confirms in general.
//!
//! Numerical route: nu_alpha solves the singular system (Q^T - I) nu = 0
//! with a normalization row (exact for small dense classes, and periodic
//! classes have no power-iteration limit to use instead); y_alpha solves
//! (I - P_DD) y_D = P_D,alpha 1 on the transient block, whose spectral
//! radius is below 1.

use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, Observable, SignedMeasure};
use crate::linalg;
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::structure::{analyze, ChainStructure};

/// Closed classes, transient set, invariant measures, absorption
/// eigenfunctions, and the Cesaro limit kernel of one Markov kernel.
#[derive(Clone, Debug)]
pub struct ErgodicDecomposition<S: Scalar> {
    kernel: MarkovKernel<S>,
    structure: ChainStructure,
    invariant_measures: Vec<SignedMeasure<S>>,
    eigenfunctions: Vec<Observable<S>>,
    limit_kernel: MarkovKernel<S>,
}

/// Invariant measure of an irreducible stochastic block: solves
/// (Q^T - I) nu = 0 with the first equation replaced by sum nu = 1.
/// Any single row may be replaced because the columns of Q^T - I sum to 0.
pub(crate) fn stationary_of_block<S: Scalar>(q: &Mat<S>) -> Result<Vec<S>> {
    let k = q.nrows();
    let mut a = Mat::<S>::from_fn(k, k, |i, j| {
        let v = q.get(j, i);
        if i == j {
            v - S::one()
        } else {
            v
        }
    });
    for j in 0..k {
        a.set(0, j, S::one());
    }
    let mut rhs = vec![S::zero(); k];
    rhs[0] = S::one();
    linalg::solve_vec(&a, &rhs)
}

/// Decomposes a kernel into its ergodic parts.
pub fn decompose<S: Scalar>(kernel: &MarkovKernel<S>) -> Result<ErgodicDecomposition<S>> {
    let n = kernel.size();
    let structure = analyze(kernel);
    let l = structure.class_count();

    // Per-class invariant measures, embedded into the full space.
    let mut invariant_measures = Vec::with_capacity(l);
    for class in &structure.classes {
        let k = class.states.len();
        let q = Mat::from_fn(k, k, |i, j| kernel.prob(class.states[i], class.states[j]));
        let nu = stationary_of_block(&q)?;
        let mut weights = vec![S::zero(); n];
        for (i, &s) in class.states.iter().enumerate() {
            weights[s] = nu[i];
        }
        invariant_measures.push(SignedMeasure::new(kernel.space().clone(), weights)?);
    }

    // Absorption probabilities: boundary values on the classes, one linear
    // solve on the transient block shared by all classes.
    let t = &structure.transient;
    let transient_part: Option<Mat<S>> = if t.is_empty() {
        None
    } else {
        let m = t.len();
        let a = Mat::from_fn(m, m, |i, j| {
            let v = -kernel.prob(t[i], t[j]);
            if i == j {
                v + S::one()
            } else {
                v
            }
        });
        let rhs = Mat::from_fn(m, l, |i, alpha| {
            structure.classes[alpha]
                .states
                .iter()
                .fold(S::zero(), |acc, &y| acc + kernel.prob(t[i], y))
        });
        Some(linalg::solve(&a, &rhs)?)
    };

    let mut eigenfunctions = Vec::with_capacity(l);
    for alpha in 0..l {
        let mut values = vec![S::zero(); n];
        for &s in &structure.classes[alpha].states {
            values[s] = S::one();
        }
        if let Some(y_t) = &transient_part {
            for (i, &s) in t.iter().enumerate() {
                values[s] = y_t.get(i, alpha);
            }
        }
        eigenfunctions.push(Observable::new(kernel.space().clone(), values)?);
    }

    // p1(x, .) = sum_alpha y_alpha(x) nu_alpha(.), a stochastic projection.
    let mut p1 = Mat::<S>::zeros(n, n);
    for alpha in 0..l {
        p1.add_outer(
            S::one(),
            eigenfunctions[alpha].values(),
            invariant_measures[alpha].weights(),
        );
    }
    let limit_kernel = MarkovKernel::new(kernel.space().clone(), p1)?;

    Ok(ErgodicDecomposition {
        kernel: kernel.clone(),
        structure,
        invariant_measures,
        eigenfunctions,
        limit_kernel,
    })
}

impl<S: Scalar> ErgodicDecomposition<S> {
    pub fn kernel(&self) -> &MarkovKernel<S> {
        &self.kernel
    }

    pub fn structure(&self) -> &ChainStructure {
        &self.structure
    }

    /// Number of ergodic classes, l >= 1.
    pub fn class_count(&self) -> usize {
        self.structure.class_count()
    }

    /// States of class alpha, ascending.
    pub fn class_states(&self, alpha: usize) -> &[usize] {
        &self.structure.classes[alpha].states
    }

    /// Transient states, ascending.
    pub fn transient(&self) -> &[usize] {
        &self.structure.transient
    }

    /// Invariant probability measure of class alpha on the full space.
    pub fn invariant_measure(&self, alpha: usize) -> &SignedMeasure<S> {
        &self.invariant_measures[alpha]
    }

    /// Absorption eigenfunction of class alpha: T* y = y, values in [0, 1].
    pub fn eigenfunction(&self, alpha: usize) -> &Observable<S> {
        &self.eigenfunctions[alpha]
    }

    /// The Cesaro limit kernel p1.
    pub fn limit_kernel(&self) -> &MarkovKernel<S> {
        &self.limit_kernel
    }

    /// Operator-norm distance between the n-term Cesaro average and p1;
    /// n times this quantity stays bounded as n grows.
    pub fn limit_kernel_error(&self, n: u64) -> S {
        self.kernel
            .cesaro_average(n, false)
            .row_distance(self.limit_kernel.matrix())
    }

    /// Long-run Cesaro limit of the iterates of an initial probability
    /// measure: sum_alpha <mu, y_alpha> nu_alpha. The coefficients equal
    /// mu(E_alpha) whenever mu(Delta) = 0.
    pub fn limit_of_initial_measure(&self, mu: &SignedMeasure<S>) -> Result<SignedMeasure<S>> {
        self.kernel.space().check_same(mu.space(), "limit_of_initial_measure")?;
        if !mu.is_probability() {
            return Err(Error::InvalidInput(
                "limit_of_initial_measure needs a probability measure".into(),
            ));
        }
        let n = self.kernel.size();
        let mut weights = vec![S::zero(); n];
        for alpha in 0..self.class_count() {
            let w = mu.integrate(&self.eigenfunctions[alpha])?;
            for (out, nu) in weights.iter_mut().zip(self.invariant_measures[alpha].weights()) {
                *out = *out + w * *nu;
            }
        }
        SignedMeasure::new(self.kernel.space().clone(), weights)
    }

    /// Time average of g restricted to class alpha:
    /// (1/n) sum over i < n of (T*)^i (g 1_{E_alpha}).
    /// At states of E_alpha this converges to <nu_alpha, g>; elsewhere the
    /// limit picks up the absorption probability y_alpha as a factor.
    pub fn restricted_time_average(
        &self,
        alpha: usize,
        g: &Observable<S>,
        n: u64,
    ) -> Result<Observable<S>> {
        if alpha >= self.class_count() {
            return Err(Error::InvalidInput(format!(
                "class index {alpha} out of range, kernel has {} classes",
                self.class_count()
            )));
        }
        self.kernel.space().check_same(g.space(), "restricted_time_average")?;
        if n == 0 {
            return Err(Error::InvalidInput("restricted_time_average needs n >= 1".into()));
        }
        let size = self.kernel.size();
        let mut masked = vec![S::zero(); size];
        for &s in self.class_states(alpha) {
            masked[s] = g.value(s);
        }
        let mut h = Observable::new(self.kernel.space().clone(), masked)?;
        let mut acc = vec![S::zero(); size];
        for step in 0..n {
            for (a, v) in acc.iter_mut().zip(h.values()) {
                *a = *a + *v;
            }
            if step + 1 < n {
                h = self.kernel.apply_observable(&h)?;
            }
        }
        let inv_n = S::one() / S::from_u64(n).unwrap();
        Observable::new(
            self.kernel.space().clone(),
            acc.into_iter().map(|v| v * inv_n).collect(),
        )
    }
}
