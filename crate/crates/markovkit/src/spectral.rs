//! Peripheral spectrum of a finite Markov kernel and the induced splitting
//! p^n = S^n + sum_i lambda_i^n T_i.
//!
//! The peripheral eigenvalues of a stochastic matrix are exactly the roots
//! of unity contributed by its closed classes: a class of period d
//! contributes omega_d^j for j = 0..d-1. That makes the peripheral part
//! computable structurally, without trusting a numerical eigensolver near
//! the unit circle:
//!
//! * right eigenvector for (class alpha, root omega^j): omega^{j phase(x)}
//!   on the class, zero on the other classes, extended to the transient set
//!   by solving (lambda I - P_DD) v_D = P_D,alpha v_alpha;
//! * left eigenvector: nu_alpha(x) omega^{-j phase(x)} on the class, zero
//!   elsewhere.
//!
//! The pairing <u, v> = 1 holds automatically and pairs from different
//! contributors annihilate, so T_lambda = sum of v (x) u over contributors
//! is the spectral projection. The residual S = p - sum lambda T_lambda
//! then has spectral radius strictly below 1 and the power formula is an
//! algebraic identity.
//!
//! A numerical eigensolve is still run once, for two purposes only: the
//! decay rate r = max non-peripheral modulus, and a degeneracy guard that
//! insists the numerically peripheral eigenvalues match the structural
//! roots as a multiset. A kernel whose interior spectrum creeps inside the
//! peripheral band is reported as degenerate rather than silently split.

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::decompose::decompose;
use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::linalg;
use crate::matrix::{complexify, Mat};
use crate::scalar::{Entry, Scalar};
use crate::structure::gcd;

/// Peripheral eigenvalues with their spectral projections, plus the
/// strictly decaying residual.
#[derive(Clone, Debug)]
pub struct SpectralSplit<S: Scalar> {
    kernel: MarkovKernel<S>,
    eigenvalues: Vec<Complex<S>>,
    root_fractions: Vec<(u64, u64)>,
    projections: Vec<Mat<Complex<S>>>,
    residual: Mat<Complex<S>>,
    decay_rate: S,
    decay_constant: S,
}

/// Residual norms ||S^m|| for m = 1..=n_max with a fitted decay constant.
#[derive(Clone, Debug)]
pub struct DecayProfile<S: Scalar> {
    /// (m, ||S^m||) pairs.
    pub points: Vec<(u64, S)>,
    /// Smallest constant M with ||S^m|| <= M r^m over the profiled range
    /// (reference rate 1/2 when the residual is nilpotent).
    pub fitted_constant: S,
}

/// exp(2 pi i num / den) with quarter turns exact.
fn unit_root<S: Scalar>(num: u64, den: u64) -> Complex<S> {
    let num = num % den;
    let quarters = num * 4;
    if quarters % den == 0 {
        return match quarters / den {
            0 => Complex::new(S::one(), S::zero()),
            1 => Complex::new(S::zero(), S::one()),
            2 => Complex::new(-S::one(), S::zero()),
            _ => Complex::new(S::zero(), -S::one()),
        };
    }
    let angle = S::of(2.0) * S::PI() * S::from_u64(num).unwrap() / S::from_u64(den).unwrap();
    Complex::from_polar(S::one(), angle)
}

/// Splits a kernel at the given peripheral cutoff; tol must lie in (0, 0.5).
pub fn compute_split<S: Scalar>(
    kernel: &MarkovKernel<S>,
    peripheral_tol: S,
) -> Result<SpectralSplit<S>> {
    if !(peripheral_tol > S::zero() && peripheral_tol < S::of(0.5)) {
        return Err(Error::InvalidInput(format!(
            "peripheral tolerance must lie strictly between 0 and 0.5, got {peripheral_tol}"
        )));
    }
    let decomp = decompose(kernel)?;
    let structure = decomp.structure();
    let n = kernel.size();

    // Group (class, j) contributors by their root of unity j/d in lowest
    // terms, keyed (den, num) so the iteration order puts lambda = 1 first.
    let mut by_root: BTreeMap<(u64, u64), Vec<(usize, u64)>> = BTreeMap::new();
    for (alpha, class) in structure.classes.iter().enumerate() {
        let d = class.period;
        for j in 0..d {
            let g = gcd(j, d);
            by_root.entry((d / g, j / g)).or_default().push((alpha, j));
        }
    }

    let transient = &structure.transient;
    let p_tt: Option<Mat<Complex<S>>> = if transient.is_empty() {
        None
    } else {
        Some(Mat::from_fn(transient.len(), transient.len(), |i, j| {
            Complex::from_real(kernel.prob(transient[i], transient[j]))
        }))
    };

    let mut eigenvalues = Vec::with_capacity(by_root.len());
    let mut root_fractions = Vec::with_capacity(by_root.len());
    let mut projections = Vec::with_capacity(by_root.len());
    for (&(den, num), contributors) in &by_root {
        let lambda = unit_root::<S>(num, den);
        let mut proj = Mat::<Complex<S>>::zeros(n, n);
        for &(alpha, j) in contributors {
            let class = &structure.classes[alpha];
            let d = class.period;
            let mut v = vec![Complex::new(S::zero(), S::zero()); n];
            for (&s, &phase) in class.states.iter().zip(&class.phases) {
                v[s] = unit_root::<S>((j * phase as u64) % d, d);
            }
            if j == 0 {
                // lambda = 1: the transient extension is the absorption
                // probability already computed by the decomposition.
                for &s in transient {
                    v[s] = Complex::from_real(decomp.eigenfunction(alpha).value(s));
                }
            } else if let Some(p_tt) = &p_tt {
                let m = transient.len();
                let a = Mat::from_fn(m, m, |i, k| {
                    let diag = if i == k { lambda } else { Complex::new(S::zero(), S::zero()) };
                    diag - p_tt.get(i, k)
                });
                let rhs: Vec<Complex<S>> = transient
                    .iter()
                    .map(|&t| {
                        class.states.iter().fold(
                            Complex::new(S::zero(), S::zero()),
                            |acc, &s| acc + Complex::from_real(kernel.prob(t, s)) * v[s],
                        )
                    })
                    .collect();
                let v_t = linalg::solve_vec(&a, &rhs)?;
                for (&s, val) in transient.iter().zip(v_t) {
                    v[s] = val;
                }
            }
            let nu = decomp.invariant_measure(alpha).weights();
            let mut u = vec![Complex::new(S::zero(), S::zero()); n];
            for &s in &class.states {
                u[s] = v[s].conjugate() * Complex::from_real(nu[s]);
            }
            proj.add_outer(Complex::new(S::one(), S::zero()), &v, &u);
        }
        eigenvalues.push(lambda);
        root_fractions.push((num, den));
        projections.push(proj);
    }

    let p_c = complexify(kernel.matrix());
    let mut residual = p_c.clone();
    for (lambda, proj) in eigenvalues.iter().zip(&projections) {
        residual.add_assign_scaled(proj, -*lambda);
    }

    verify_split_identities(&p_c, &eigenvalues, &projections, &residual)?;

    let solver_rate = classify_spectrum(kernel, structure, peripheral_tol)?;
    let (decay_rate, decay_constant) = decay_from_residual(&residual, solver_rate, n);

    Ok(SpectralSplit {
        kernel: kernel.clone(),
        eigenvalues,
        root_fractions,
        projections,
        residual,
        decay_rate,
        decay_constant,
    })
}

/// Construction self-checks: idempotence, mutual annihilation, commutation
/// with p, and annihilation by the residual. A violation means the linear
/// solves lost too much precision to trust the split.
fn verify_split_identities<S: Scalar>(
    p_c: &Mat<Complex<S>>,
    eigenvalues: &[Complex<S>],
    projections: &[Mat<Complex<S>>],
    residual: &Mat<Complex<S>>,
) -> Result<()> {
    let tol = S::PROJECTION_TOL;
    let mut worst = S::zero();
    let mut worst_what = "";
    let mut check = |what: &'static str, dev: S| {
        if dev > worst {
            worst = dev;
            worst_what = what;
        }
    };
    for (i, proj) in projections.iter().enumerate() {
        let lambda = eigenvalues[i];
        check("idempotence", proj.matmul(proj).sub(proj).sup_row_norm());
        check(
            "left commutation",
            p_c.matmul(proj).sub(&proj.scale(lambda)).sup_row_norm(),
        );
        check(
            "right commutation",
            proj.matmul(p_c).sub(&proj.scale(lambda)).sup_row_norm(),
        );
        check("residual annihilation", residual.matmul(proj).sup_row_norm());
        check("residual annihilation", proj.matmul(residual).sup_row_norm());
        for (k, other) in projections.iter().enumerate() {
            if k != i {
                check("cross annihilation", proj.matmul(other).sup_row_norm());
            }
        }
    }
    if worst > tol {
        return Err(Error::NumericalDegeneracy(format!(
            "split self-check failed: {worst_what} off by {:.3e}",
            worst.to_f64().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// Runs the numerical eigensolve, checks the peripheral multiset against
/// the structural roots, and returns the largest non-peripheral modulus.
fn classify_spectrum<S: Scalar>(
    kernel: &MarkovKernel<S>,
    structure: &crate::structure::ChainStructure,
    peripheral_tol: S,
) -> Result<S> {
    let mut structural: Vec<Complex<S>> = Vec::new();
    for class in &structure.classes {
        for j in 0..class.period {
            structural.push(unit_root::<S>(j, class.period));
        }
    }
    let eigs = S::complex_eigenvalues(kernel.matrix());
    let cutoff = S::one() - peripheral_tol;
    let mut decay_rate = S::zero();
    let mut peripheral: Vec<Complex<S>> = Vec::new();
    for e in eigs {
        if e.modulus() >= cutoff {
            peripheral.push(e);
        } else if e.modulus() > decay_rate {
            decay_rate = e.modulus();
        }
    }
    if peripheral.len() != structural.len() {
        return Err(Error::NumericalDegeneracy(format!(
            "{} numerically peripheral eigenvalues but {} structural roots of unity; \
             an interior eigenvalue sits within {} of the unit circle",
            peripheral.len(),
            structural.len(),
            peripheral_tol.to_f64().unwrap_or(f64::NAN),
        )));
    }
    let mut used = vec![false; structural.len()];
    for e in &peripheral {
        let mut best: Option<(usize, S)> = None;
        for (i, root) in structural.iter().enumerate() {
            if used[i] {
                continue;
            }
            let dist = (*e - *root).modulus();
            if best.map_or(true, |(_, b)| dist < b) {
                best = Some((i, dist));
            }
        }
        let (i, dist) = best.expect("counts were checked equal");
        if dist > S::DEGENERACY_MATCH_TOL {
            return Err(Error::NumericalDegeneracy(format!(
                "numerically peripheral eigenvalue {:.6e}+{:.6e}i is {:.3e} away from \
                 every unmatched structural root of unity",
                e.real_part().to_f64().unwrap_or(f64::NAN),
                e.imag_part().to_f64().unwrap_or(f64::NAN),
                dist.to_f64().unwrap_or(f64::NAN),
            )));
        }
        used[i] = true;
    }
    Ok(decay_rate)
}

/// Decay rate and constant M with ||S^m|| <= M r^m, fitted over a window
/// of residual powers.
///
/// The solver-reported rate is overruled by direct norm evidence: a
/// defective zero eigenvalue perturbs under Schur by roughly eps^(1/k)
/// for a k-step Jordan block, so nilpotent residuals can read back a
/// spurious small rate. When ||S^m|| dies to numerical zero within size
/// steps the residual is treated as nilpotent: rate 0, fit against the
/// reference rate 1/2. A vanishing residual reports (0, 1).
fn decay_from_residual<S: Scalar>(
    residual: &Mat<Complex<S>>,
    solver_rate: S,
    size: usize,
) -> (S, S) {
    let tiny = S::STOCHASTIC_TOL;
    if residual.sup_row_norm() <= tiny {
        return (S::zero(), S::one());
    }
    let window = 16.max(2 * size);
    let mut norms: Vec<S> = Vec::with_capacity(window);
    let mut cur = residual.clone();
    for _ in 0..window {
        let norm = cur.sup_row_norm();
        norms.push(norm);
        if norm <= tiny {
            break;
        }
        cur = cur.matmul(residual);
    }
    let died_at = norms.iter().position(|&n| n <= tiny).map(|i| i + 1);
    let rate = match died_at {
        Some(m) if m <= size => S::zero(),
        _ => solver_rate,
    };
    let reference = if rate > S::zero() { rate } else { S::of(0.5) };
    let mut constant = S::one();
    let mut ref_pow = S::one();
    for &norm in &norms {
        ref_pow = ref_pow * reference;
        if norm <= tiny {
            break;
        }
        let ratio = norm / ref_pow;
        if ratio > constant {
            constant = ratio;
        }
    }
    (rate, constant)
}

impl<S: Scalar> SpectralSplit<S> {
    pub fn kernel(&self) -> &MarkovKernel<S> {
        &self.kernel
    }

    /// Distinct peripheral eigenvalues; lambda = 1 is always index 0.
    pub fn eigenvalues(&self) -> &[Complex<S>] {
        &self.eigenvalues
    }

    /// Each eigenvalue as an exact fraction of a turn (num, den), reduced.
    pub fn root_fractions(&self) -> &[(u64, u64)] {
        &self.root_fractions
    }

    pub fn projections(&self) -> &[Mat<Complex<S>>] {
        &self.projections
    }

    pub fn projection(&self, i: usize) -> &Mat<Complex<S>> {
        &self.projections[i]
    }

    /// S = p - sum lambda_i T_i; spectral radius strictly below 1.
    pub fn residual(&self) -> &Mat<Complex<S>> {
        &self.residual
    }

    /// Largest non-peripheral eigenvalue modulus (0 when there is none).
    pub fn decay_rate(&self) -> S {
        self.decay_rate
    }

    /// Constant M of the bound ||S^n|| <= M r^n (reference rate 1/2 when
    /// the residual is nilpotent, M = 1 when it vanishes).
    pub fn decay_constant(&self) -> S {
        self.decay_constant
    }

    /// p^n reassembled as S^n + sum lambda_i^n T_i, with the peripheral
    /// powers taken by exact rational rotation; n >= 1.
    pub fn reconstruct_power(&self, n: u64) -> Result<Mat<Complex<S>>> {
        if n == 0 {
            return Err(Error::InvalidInput("reconstruct_power needs n >= 1".into()));
        }
        let mut acc = self.residual.pow(n);
        for (&(num, den), proj) in self.root_fractions.iter().zip(&self.projections) {
            let turn = ((num as u128 * n as u128) % den as u128) as u64;
            acc.add_assign_scaled(proj, unit_root::<S>(turn, den));
        }
        Ok(acc)
    }

    /// Norms of the residual powers with a fitted decay constant; n_max >= 2.
    pub fn residual_decay_profile(&self, n_max: u64) -> Result<DecayProfile<S>> {
        if n_max < 2 {
            return Err(Error::InvalidInput("residual_decay_profile needs n_max >= 2".into()));
        }
        let mut points = Vec::with_capacity(n_max as usize);
        let mut cur = self.residual.clone();
        for m in 1..=n_max {
            points.push((m, cur.sup_row_norm()));
            if m < n_max {
                cur = cur.matmul(&self.residual);
            }
        }
        let rate = if self.decay_rate > S::zero() {
            self.decay_rate
        } else {
            S::of(0.5)
        };
        let mut fitted = S::one();
        let mut rate_pow = S::one();
        for &(_, norm) in &points {
            rate_pow = rate_pow * rate;
            if norm <= S::STOCHASTIC_TOL {
                break;
            }
            let ratio = norm / rate_pow;
            if ratio > fitted {
                fitted = ratio;
            }
        }
        Ok(DecayProfile { points, fitted_constant: fitted })
    }
}

/// Cesaro extraction of the projection at a peripheral eigenvalue:
/// (1/n) sum_{i=1}^{n} lambda^-i p^i. Converges to T_lambda at rate M/n;
/// serves as the slow independent route to the structural construction.
/// lambda must sit on the unit circle to within 1e-9.
pub fn cesaro_projection<S: Scalar>(
    kernel: &MarkovKernel<S>,
    lambda: Complex<S>,
    n: u64,
) -> Result<Mat<Complex<S>>> {
    let off_circle = (lambda.modulus() - S::one()).abs();
    let circle_tol = S::of(1e-9).max(S::epsilon() * S::of(8.0));
    if off_circle > circle_tol {
        return Err(Error::InvalidInput(format!(
            "cesaro_projection needs |lambda| = 1, modulus is off by {:.3e}",
            off_circle.to_f64().unwrap_or(f64::NAN)
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("cesaro_projection needs n >= 1".into()));
    }
    let size = kernel.size();
    let p_c = complexify(kernel.matrix());
    let inv_lambda = lambda.conjugate() / Complex::from_real(lambda.modulus() * lambda.modulus());
    let mut acc = Mat::<Complex<S>>::zeros(size, size);
    let mut cur = p_c.clone();
    let mut phase = Complex::new(S::one(), S::zero());
    for i in 1..=n {
        phase = phase * inv_lambda;
        acc.add_assign_scaled(&cur, phase);
        if i < n {
            cur = cur.matmul(&p_c);
        }
    }
    Ok(acc.scale(Complex::from_real(S::one() / S::from_u64(n).unwrap())))
}
