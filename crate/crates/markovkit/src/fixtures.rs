//! Deterministic seeded generators for tests and benchmarks: random
//! stochastic kernels, kernels with planted class structure, random
//! measures and observables, and economy models engineered to pass or
//! fail the ergodicity hypotheses.
//!
//! Every generator is a pure function of its seed, built on the same
//! counter RNG as the simulator, so test batteries are reproducible
//! across platforms.

use crate::economy::EconomyModel;
use crate::kernel::{MarkovKernel, Observable, SignedMeasure};
use crate::matrix::Mat;
use crate::simulate::u01;
use crate::space::StateSpace;

struct Rng {
    seed: u64,
    counter: u64,
}

impl Rng {
    fn new(seed: u64) -> Self {
        Rng { seed, counter: 0 }
    }

    fn next(&mut self) -> f64 {
        let u = u01(self.seed, self.counter);
        self.counter += 1;
        u
    }

    /// Uniform integer in lo..=hi.
    fn range(&mut self, lo: usize, hi: usize) -> usize {
        let span = (hi - lo + 1) as f64;
        lo + ((self.next() * span) as usize).min(hi - lo)
    }
}

fn numbered_space(prefix: &str, n: usize) -> StateSpace {
    StateSpace::new((0..n).map(|i| format!("{prefix}{i}"))).expect("distinct labels")
}

/// Dense strictly positive kernel with normalized random rows.
pub fn random_stochastic(size: usize, seed: u64) -> MarkovKernel<f64> {
    let mut rng = Rng::new(seed);
    let mut mat = Mat::zeros(size, size);
    for i in 0..size {
        let row: Vec<f64> = (0..size).map(|_| 0.05 + rng.next()).collect();
        let sum: f64 = row.iter().sum();
        for (j, v) in row.iter().enumerate() {
            mat.set(i, j, v / sum);
        }
    }
    MarkovKernel::new(numbered_space("s", size), mat).expect("normalized rows")
}

/// Deterministic cycle of the given length: i -> i+1 mod len.
pub fn cycle_kernel(len: usize) -> MarkovKernel<f64> {
    let mut mat = Mat::zeros(len, len);
    for i in 0..len {
        mat.set(i, (i + 1) % len, 1.0);
    }
    MarkovKernel::new(numbered_space("s", len), mat).expect("permutation rows")
}

/// A kernel with known structure planted by construction.
pub struct Planted {
    pub kernel: MarkovKernel<f64>,
    /// Number of closed classes laid out at the front of the space.
    pub class_count: usize,
    /// Number of trailing transient states.
    pub transient_count: usize,
}

/// Plants 1-3 closed classes of 1-3 states each (dense or pure cycle) and
/// up to 5 transient states with dense rows over the whole space; total
/// size stays <= 12.
pub fn planted_kernel(seed: u64) -> Planted {
    let mut rng = Rng::new(seed ^ 0x51A9_DE83_7C04_F1B6);
    let class_count = rng.range(1, 3);
    let sizes: Vec<usize> = (0..class_count).map(|_| rng.range(1, 3)).collect();
    let class_total: usize = sizes.iter().sum();
    let transient_count = rng.range(0, 5).min(12 - class_total);
    let n = class_total + transient_count;
    let mut mat = Mat::zeros(n, n);

    let mut start = 0;
    for &size in &sizes {
        let cyclic = rng.next() < 0.5;
        if cyclic {
            for i in 0..size {
                mat.set(start + i, start + (i + 1) % size, 1.0);
            }
        } else {
            for i in 0..size {
                let row: Vec<f64> = (0..size).map(|_| 0.05 + rng.next()).collect();
                let sum: f64 = row.iter().sum();
                for (j, v) in row.iter().enumerate() {
                    mat.set(start + i, start + j, v / sum);
                }
            }
        }
        start += size;
    }
    for i in class_total..n {
        let row: Vec<f64> = (0..n).map(|_| 0.05 + rng.next()).collect();
        let sum: f64 = row.iter().sum();
        for (j, v) in row.iter().enumerate() {
            mat.set(i, j, v / sum);
        }
    }

    let kernel = MarkovKernel::new(numbered_space("s", n), mat).expect("planted rows");
    Planted { kernel, class_count, transient_count }
}

/// Random probability measure with strictly positive weights.
pub fn random_probability_measure(space: &StateSpace, seed: u64) -> SignedMeasure<f64> {
    let mut rng = Rng::new(seed ^ 0x0BAD_5EED_0000_0001);
    let raw: Vec<f64> = (0..space.size()).map(|_| 0.01 + rng.next()).collect();
    let sum: f64 = raw.iter().sum();
    SignedMeasure::new(space.clone(), raw.iter().map(|v| v / sum).collect())
        .expect("normalized weights")
}

/// Random signed measure with weights in [-1, 1].
pub fn random_signed_measure(space: &StateSpace, seed: u64) -> SignedMeasure<f64> {
    let mut rng = Rng::new(seed ^ 0x0BAD_5EED_0000_0002);
    SignedMeasure::new(
        space.clone(),
        (0..space.size()).map(|_| 2.0 * rng.next() - 1.0).collect(),
    )
    .expect("finite weights")
}

/// Random observable with values in [-1, 1].
pub fn random_observable(space: &StateSpace, seed: u64) -> Observable<f64> {
    let mut rng = Rng::new(seed ^ 0x0BAD_5EED_0000_0003);
    Observable::new(
        space.clone(),
        (0..space.size()).map(|_| 2.0 * rng.next() - 1.0).collect(),
    )
    .expect("finite values")
}

/// Model that satisfies all ergodicity hypotheses: shock 0 sends every
/// state to one fixed target (collapse in one step), all other
/// transitions are arbitrary, and the shock kernel is bounded below, so
/// every shock recurs.
pub fn random_model(seed: u64) -> EconomyModel<f64> {
    let mut rng = Rng::new(seed ^ 0x8059_11F3_6AA2_4D7C);
    let exo_n = rng.range(1, 3);
    let endo_n = rng.range(1, 3);
    let exo = numbered_space("e", exo_n);
    let endo = numbered_space("d", endo_n);

    let mut q = Mat::zeros(exo_n, exo_n);
    for i in 0..exo_n {
        let row: Vec<f64> = (0..exo_n).map(|_| 0.1 + rng.next()).collect();
        let sum: f64 = row.iter().sum();
        for (j, v) in row.iter().enumerate() {
            q.set(i, j, v / sum);
        }
    }
    let q = MarkovKernel::new(exo.clone(), q).expect("normalized rows");

    let states = exo_n * endo_n;
    let target = rng.range(0, states - 1);
    let mut law = Vec::with_capacity(states * exo_n);
    for _x in 0..states {
        for e in 0..exo_n {
            // A state's exogenous component must match the shock that
            // produced it, so targets under shock e stay inside e's slab.
            let slab = e * endo_n;
            if e == 0 {
                law.push(if target / endo_n == 0 { target } else { target % endo_n });
            } else {
                law.push(slab + rng.range(0, endo_n - 1));
            }
        }
    }
    EconomyModel::new(exo, endo, q, law).expect("total law")
}

/// Model whose only collapsing shock has probability zero everywhere:
/// shock 0 collapses in one step but its q-column is zero, every other
/// shock preserves the endogenous component, so exactly two invariant
/// classes survive (one per endogenous value).
pub fn non_ergodic_model(seed: u64) -> EconomyModel<f64> {
    let mut rng = Rng::new(seed ^ 0x3C6E_F372_FE94_F82A);
    let exo_n = rng.range(2, 3);
    let endo_n = 2;
    let exo = numbered_space("e", exo_n);
    let endo = numbered_space("d", endo_n);

    let mut q = Mat::zeros(exo_n, exo_n);
    for i in 0..exo_n {
        let row: Vec<f64> = (0..exo_n).map(|j| if j == 0 { 0.0 } else { 0.1 + rng.next() }).collect();
        let sum: f64 = row.iter().sum();
        for (j, v) in row.iter().enumerate() {
            q.set(i, j, v / sum);
        }
    }
    let q = MarkovKernel::new(exo.clone(), q).expect("normalized rows");

    let states = exo_n * endo_n;
    let mut law = Vec::with_capacity(states * exo_n);
    for x in 0..states {
        let d = x % endo_n;
        for e in 0..exo_n {
            if e == 0 {
                law.push(0);
            } else {
                law.push(e * endo_n + d);
            }
        }
    }
    EconomyModel::new(exo, endo, q, law).expect("total law")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::structure::analyze;

    #[test]
    fn random_kernels_are_dense_and_reproducible() {
        let a = random_stochastic(6, 11);
        let b = random_stochastic(6, 11);
        assert_eq!(a.matrix(), b.matrix());
        for i in 0..6 {
            for j in 0..6 {
                assert!(a.prob(i, j) > 0.0);
            }
        }
    }

    #[test]
    fn planted_structure_is_recovered_by_analysis() {
        for seed in 0..60 {
            let p = planted_kernel(seed);
            let s = analyze(&p.kernel);
            assert_eq!(s.classes.len(), p.class_count, "seed {seed}");
            assert_eq!(s.transient.len(), p.transient_count, "seed {seed}");
            assert!(p.kernel.size() <= 12);
        }
    }

    #[test]
    fn cycles_have_their_full_period() {
        for len in 2..=5 {
            let s = analyze(&cycle_kernel(len));
            assert_eq!(s.classes.len(), 1);
            assert_eq!(s.classes[0].period, len as u64);
        }
    }

    #[test]
    fn random_measures_are_probabilities() {
        let space = numbered_space("s", 5);
        for seed in 0..20 {
            assert!(random_probability_measure(&space, seed).is_probability());
            let g = random_observable(&space, seed);
            assert!(g.sup_norm() <= 1.0);
        }
    }

    #[test]
    fn passing_models_collapse_and_have_one_class() {
        for seed in 0..40 {
            let m = random_model(seed);
            let r = m.check_theorem2(m.state_space().size() as u64).unwrap();
            assert!(r.satisfied, "seed {seed}: {:?}", r.diagnostics);
            let d = decompose(&m.induce_kernel()).unwrap();
            assert_eq!(d.class_count(), 1, "seed {seed}");
        }
    }

    #[test]
    fn failing_models_keep_two_classes() {
        for seed in 0..40 {
            let m = non_ergodic_model(seed);
            let r = m.check_theorem2(m.state_space().size() as u64).unwrap();
            assert!(!r.satisfied, "seed {seed}");
            let d = decompose(&m.induce_kernel()).unwrap();
            assert_eq!(d.class_count(), 2, "seed {seed}");
        }
    }
}
