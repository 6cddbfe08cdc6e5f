//! Seeded path simulation and the empirical side of the ergodic theorem:
//! time averages along a simulated path against the space average under
//! the invariant measure, plus exact (noiseless) time averages and their
//! convergence profile.
//!
//! Randomness comes from a counter-based SplitMix64: draw i is the
//! SplitMix64 finalizer applied to seed + (i+1) * golden gamma, mapped to
//! [0, 1) through the top 53 bits. Every draw is a pure function of
//! (seed, i), so paths are bit-for-bit reproducible across platforms and
//! runs, and independent runs need no shared generator state. Transitions
//! sample by inverse CDF against the kernel row in state-label order.

use crate::decompose::decompose;
use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, Observable};
use crate::scalar::Scalar;

/// The i-th uniform draw of a seed, in [0, 1).
pub(crate) fn u01(seed: u64, i: u64) -> f64 {
    let mut z = seed.wrapping_add((i.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}

/// One realized trajectory of a kernel under a fixed seed.
#[derive(Clone, Debug)]
pub struct SimulationRun<S: Scalar> {
    kernel: MarkovKernel<S>,
    initial_state: usize,
    seed: u64,
    path: Vec<usize>,
}

impl<S: Scalar> SimulationRun<S> {
    pub fn kernel(&self) -> &MarkovKernel<S> {
        &self.kernel
    }

    /// Index of path[0] in the kernel's space.
    pub fn initial_state(&self) -> usize {
        self.initial_state
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Visited state indices; path[0] is the initial state.
    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    /// (1/n) sum of g over the path, initial state included.
    pub fn empirical_time_average(&self, g: &Observable<S>) -> Result<S> {
        g.space().check_same(self.kernel.space(), "observable")?;
        let mut sum = S::zero();
        let mut comp = S::zero();
        for &x in &self.path {
            let term = g.value(x) - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
        }
        Ok(sum / S::of(self.path.len() as f64))
    }

    /// Empirical mean of g along the path and the standard error of that
    /// mean, sqrt(sample variance / n).
    pub fn empirical_stats(&self, g: &Observable<S>) -> Result<(S, S)> {
        let mean = self.empirical_time_average(g)?;
        let n = self.path.len();
        if n < 2 {
            return Ok((mean, S::zero()));
        }
        let mut ss = S::zero();
        for &x in &self.path {
            let d = g.value(x) - mean;
            ss += d * d;
        }
        let var = ss / S::of((n - 1) as f64);
        Ok((mean, (var / S::of(n as f64)).sqrt()))
    }
}

/// Simulates n states (so n - 1 transitions) starting from x0. Transition
/// i consumes draw i of the seed; rows are sampled by inverse CDF in state
/// order, so zero-probability states are never selected and the last
/// positive-probability state absorbs any leftover rounding mass.
pub fn simulate_path<S: Scalar>(
    kernel: &MarkovKernel<S>,
    x0: &str,
    n: u64,
    seed: u64,
) -> Result<SimulationRun<S>> {
    if n == 0 {
        return Err(Error::InvalidInput("simulation needs n >= 1".into()));
    }
    let start = kernel.space().require(x0)?;
    let size = kernel.size();
    let mut path = Vec::with_capacity(n as usize);
    path.push(start);
    let mut cur = start;
    for i in 0..n - 1 {
        let u = S::of(u01(seed, i));
        let mut cum = S::zero();
        let mut chosen = None;
        let mut last_positive = cur;
        for y in 0..size {
            let p = kernel.prob(cur, y);
            if p > S::zero() {
                last_positive = y;
                cum += p;
                if u < cum {
                    chosen = Some(y);
                    break;
                }
            }
        }
        cur = chosen.unwrap_or(last_positive);
        path.push(cur);
    }
    Ok(SimulationRun { kernel: kernel.clone(), initial_state: start, seed, path })
}

/// The exact n-term time average (1/n) sum_{i=0}^{n-1} (P^i g)(x),
/// computed by repeated observable pullback; the noiseless counterpart of
/// the empirical average.
pub fn deterministic_time_average<S: Scalar>(
    kernel: &MarkovKernel<S>,
    g: &Observable<S>,
    x: &str,
    n: u64,
) -> Result<S> {
    if n == 0 {
        return Err(Error::InvalidInput("time average needs n >= 1".into()));
    }
    let idx = kernel.space().require(x)?;
    g.space().check_same(kernel.space(), "observable")?;
    let mut cur = g.clone();
    let mut sum = S::zero();
    let mut comp = S::zero();
    for i in 0..n {
        let term = cur.value(idx) - comp;
        let next = sum + term;
        comp = (next - sum) - term;
        sum = next;
        if i + 1 < n {
            cur = kernel.apply_observable(&cur)?;
        }
    }
    Ok(sum / S::of(n as f64))
}

/// Deviations of the exact time average from the space average, on a grid
/// of horizon lengths, with the smallest constant M making every
/// deviation <= M / n over the grid.
#[derive(Clone, Debug)]
pub struct ConvergenceProfile<S: Scalar> {
    /// The space average the time averages converge to.
    pub limit: S,
    /// (n, |time average at n - limit|) pairs, in the requested order.
    pub points: Vec<(u64, S)>,
    /// max over the grid of n * deviation.
    pub fitted_constant: S,
}

/// Profiles |(1/n) sum (P^i g)(x) - <mu*, g>| over the grid. The kernel
/// must have a unique invariant measure; with several ergodic classes the
/// limit depends on the start and the profile is refused.
pub fn convergence_profile<S: Scalar>(
    kernel: &MarkovKernel<S>,
    g: &Observable<S>,
    x: &str,
    n_grid: &[u64],
) -> Result<ConvergenceProfile<S>> {
    let idx = kernel.space().require(x)?;
    g.space().check_same(kernel.space(), "observable")?;
    if let Some(&bad) = n_grid.iter().find(|&&n| n == 0) {
        return Err(Error::InvalidInput(format!("grid entry {bad} must be >= 1")));
    }
    let d = decompose(kernel)?;
    if d.class_count() != 1 {
        let reps: Vec<&str> = (0..d.class_count())
            .map(|a| kernel.space().label(d.class_states(a)[0]))
            .collect();
        return Err(Error::AmbiguousLimit {
            count: d.class_count(),
            classes: reps.join(", "),
        });
    }
    let limit = d.invariant_measure(0).integrate(g)?;

    let max_n = n_grid.iter().copied().max().unwrap_or(0);
    let mut averages = std::collections::BTreeMap::new();
    let wanted: std::collections::BTreeSet<u64> = n_grid.iter().copied().collect();
    let mut cur = g.clone();
    let mut sum = S::zero();
    let mut comp = S::zero();
    for i in 0..max_n {
        let term = cur.value(idx) - comp;
        let next = sum + term;
        comp = (next - sum) - term;
        sum = next;
        if wanted.contains(&(i + 1)) {
            averages.insert(i + 1, sum / S::of((i + 1) as f64));
        }
        if i + 1 < max_n {
            cur = kernel.apply_observable(&cur)?;
        }
    }

    let points: Vec<(u64, S)> = n_grid
        .iter()
        .map(|&n| (n, (averages[&n] - limit).abs()))
        .collect();
    let fitted_constant = points
        .iter()
        .map(|&(n, dev)| S::of(n as f64) * dev)
        .fold(S::zero(), S::max);
    Ok(ConvergenceProfile { limit, points, fitted_constant })
}
