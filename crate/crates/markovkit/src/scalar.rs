//! Scalar abstraction: the crate is generic over the floating-point type.
//!
//! [`Entry`] covers everything a dense matrix can hold, real scalars and
//! their complex extensions, with ring arithmetic and a real modulus.
//! [`Scalar`] is the real type parameter of the public API (f32 or f64).
//! Every acceptance threshold in the crate is an associated constant of
//! `Scalar`: the f64 values are the reference tolerances, and the f32
//! values are scaled up by roughly the machine-epsilon ratio so the same
//! algorithms remain checkable in single precision.

use std::fmt::{Debug, Display};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};

use crate::matrix::Mat;

/// Matrix entry: closed under field arithmetic, with a real modulus.
pub trait Entry:
    Copy
    + Debug
    + Display
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    /// The real scalar this entry type is built over.
    type Real: Scalar;

    /// Absolute value (real) or complex modulus.
    fn modulus(self) -> Self::Real;

    /// Embeds a real number.
    fn from_real(re: Self::Real) -> Self;

    /// Complex conjugate; identity on reals.
    fn conjugate(self) -> Self;

    fn real_part(self) -> Self::Real;

    fn imag_part(self) -> Self::Real;
}

/// Real scalar type of the public API.
///
/// The eigenvalue hook keeps the numerical backend confined to the two
/// concrete impls; generic code never names the backend.
pub trait Scalar:
    num_traits::Float
    + num_traits::FloatConst
    + num_traits::NumAssign
    + FromPrimitive
    + ToPrimitive
    + Default
    + Entry<Real = Self>
{
    /// Strict row-sum tolerance at kernel construction.
    const STOCHASTIC_TOL: Self;
    /// Renormalizing constructors accept rows off by up to this much.
    const RENORMALIZE_TOL: Self;
    /// Tolerance for algebraic identities of projections and decompositions.
    const PROJECTION_TOL: Self;
    /// Imaginary residue allowed when a complex result is returned as real.
    const IMAG_TOL: Self;
    /// Default cutoff on the modulus gap to 1 for peripheral eigenvalues.
    const PERIPHERAL_TOL: Self;
    /// Witness inequalities of condition reports re-verify within this.
    const REPLAY_TOL: Self;
    /// Numerical eigenvalues must sit this close to the structural roots.
    const DEGENERACY_MATCH_TOL: Self;

    /// Eigenvalues of a square matrix, in no particular order.
    fn complex_eigenvalues(mat: &Mat<Self>) -> Vec<Complex<Self>>;

    /// Lossy cast for literals in generic code.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal representable in every scalar type")
    }
}

macro_rules! real_entry {
    ($t:ty) => {
        impl Entry for $t {
            type Real = $t;
            fn modulus(self) -> $t {
                self.abs()
            }
            fn from_real(re: $t) -> $t {
                re
            }
            fn conjugate(self) -> $t {
                self
            }
            fn real_part(self) -> $t {
                self
            }
            fn imag_part(self) -> $t {
                0.0
            }
        }
    };
}

real_entry!(f32);
real_entry!(f64);

/// The complex extension of any scalar is itself a matrix entry.
impl<S: Scalar> Entry for Complex<S> {
    type Real = S;
    fn modulus(self) -> S {
        self.norm()
    }
    fn from_real(re: S) -> Self {
        Complex::new(re, S::zero())
    }
    fn conjugate(self) -> Self {
        Complex::new(self.re, -self.im)
    }
    fn real_part(self) -> S {
        self.re
    }
    fn imag_part(self) -> S {
        self.im
    }
}

/// Shifted QR can stagnate on matrices whose spectrum is symmetric under
/// the shift strategy, pure cyclic permutations being the textbook case.
/// The fast path bounds the iteration count; on failure the matrix is
/// conjugated by a fixed random orthogonal matrix, which breaks the
/// symmetry without moving the spectrum, and solved with a larger bound.
fn eigenvalues_via_schur<S>(n: usize, data: &[S]) -> Vec<Complex<S>>
where
    S: nalgebra::RealField + FromPrimitive + Copy,
{
    let solve = |m: nalgebra::DMatrix<S>, max_niter: usize| {
        nalgebra::linalg::Schur::try_new(m, S::default_epsilon(), max_niter)
            .map(|s| s.complex_eigenvalues().iter().copied().collect::<Vec<_>>())
    };
    let dm = nalgebra::DMatrix::from_row_slice(n, n, data);
    if let Some(eigs) = solve(dm.clone(), 500) {
        return eigs;
    }
    let seed = 0x5EED_0E16_E2F0_0123u64;
    let noise = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        S::from_f64(crate::simulate::u01(seed, (i * n + j) as u64) - 0.5).unwrap()
    });
    let q = noise.qr().q();
    let conjugated = q.transpose() * dm * &q;
    solve(conjugated, 100_000)
        .expect("eigensolve stagnated even after an orthogonal change of basis")
}

impl Scalar for f64 {
    const STOCHASTIC_TOL: f64 = 1e-12;
    const RENORMALIZE_TOL: f64 = 1e-9;
    const PROJECTION_TOL: f64 = 1e-10;
    const IMAG_TOL: f64 = 1e-10;
    const PERIPHERAL_TOL: f64 = 1e-8;
    const REPLAY_TOL: f64 = 1e-12;
    const DEGENERACY_MATCH_TOL: f64 = 1e-6;

    fn complex_eigenvalues(mat: &Mat<f64>) -> Vec<Complex<f64>> {
        eigenvalues_via_schur(mat.nrows(), mat.data())
    }
}

impl Scalar for f32 {
    const STOCHASTIC_TOL: f32 = 1e-4;
    const RENORMALIZE_TOL: f32 = 1e-3;
    const PROJECTION_TOL: f32 = 1e-3;
    const IMAG_TOL: f32 = 1e-3;
    const PERIPHERAL_TOL: f32 = 1e-3;
    const REPLAY_TOL: f32 = 1e-4;
    const DEGENERACY_MATCH_TOL: f32 = 1e-2;

    fn complex_eigenvalues(mat: &Mat<f32>) -> Vec<Complex<f32>> {
        eigenvalues_via_schur(mat.nrows(), mat.data())
    }
}
