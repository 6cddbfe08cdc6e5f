//! Analysis toolkit for finite-state Markov kernels.
//!
//! A kernel acts on signed measures from the right and on observables
//! from the left; the two actions are adjoint, and everything here is
//! phrased in terms of them:
//!
//! - [`decompose`] splits the space into closed communicating classes and
//!   transient states, solves for each class's invariant measure and
//!   absorption profile, and assembles the limit of the time-averaged
//!   kernel in closed form.
//! - [`compute_split`] separates the unit-modulus part of the transition
//!   matrix into exact root-of-unity eigenprojections plus a residual
//!   whose powers decay geometrically, and certifies the split by
//!   replaying its defining identities.
//! - [`conditions`] checks one-step and k-step minorization, hitting
//!   times of a candidate small set, a contraction witness around a
//!   center state, and uniform integrability of density families, all
//!   with machine-checkable witnesses that can be replayed.
//! - [`economy`] builds the kernel a shock process induces on exogenous
//!   times endogenous product states, searches for a collapse witness
//!   certifying a unique invariant measure, and folds excursions into a
//!   trace chain on a subset.
//! - [`simulate`] realizes seeded, bit-reproducible trajectories and
//!   compares empirical time averages against their exact counterparts.
//! - [`io`] fixes the JSON and CSV schemas shared with the command-line
//!   front end.
//!
//! Numeric code is generic over the scalar via the [`Scalar`] trait;
//! `f64` is the reference precision and `f32` is supported throughout.
//! The `*64`/`*32` aliases at the crate root name the concrete
//! instantiations.

pub mod conditions;
pub mod decompose;
pub mod economy;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod kernel;
pub mod linalg;
pub mod matrix;
pub mod scalar;
pub mod simulate;
pub mod space;
pub mod spectral;
pub mod structure;

pub use conditions::{
    check_doeblin, check_harris, check_qscc_witness, check_uniform_integrability, Condition,
    ConditionReport, Witnesses,
};
pub use decompose::{decompose, ErgodicDecomposition};
pub use economy::{trace_chain, EconomyModel, EconomyVerdict, TraceChain};
pub use error::{Error, Result};
pub use kernel::{MarkovKernel, Observable, SignedMeasure};
pub use scalar::{Entry, Scalar};
pub use simulate::{
    convergence_profile, deterministic_time_average, simulate_path, ConvergenceProfile,
    SimulationRun,
};
pub use space::StateSpace;
pub use spectral::{cesaro_projection, compute_split, DecayProfile, SpectralSplit};

pub type MarkovKernel64 = MarkovKernel<f64>;
pub type MarkovKernel32 = MarkovKernel<f32>;
pub type SignedMeasure64 = SignedMeasure<f64>;
pub type SignedMeasure32 = SignedMeasure<f32>;
pub type Observable64 = Observable<f64>;
pub type Observable32 = Observable<f32>;
pub type ErgodicDecomposition64 = ErgodicDecomposition<f64>;
pub type ErgodicDecomposition32 = ErgodicDecomposition<f32>;
pub type SpectralSplit64 = SpectralSplit<f64>;
pub type SpectralSplit32 = SpectralSplit<f32>;
pub type ConditionReport64 = ConditionReport<f64>;
pub type ConditionReport32 = ConditionReport<f32>;
pub type EconomyModel64 = EconomyModel<f64>;
pub type EconomyModel32 = EconomyModel<f32>;
pub type SimulationRun64 = SimulationRun<f64>;
pub type SimulationRun32 = SimulationRun<f32>;
