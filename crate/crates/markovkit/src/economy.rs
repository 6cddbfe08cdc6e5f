//! Economic state dynamics driven by exogenous shocks, the kernel they
//! induce on the product state space, and the trace (stopped) chain.
//!
//! A model has exogenous states E with their own shock kernel q, endogenous
//! states D, a product state space X = E x D, and an evolution law
//! f: X x E -> X that picks the next state given the current state and the
//! freshly drawn shock. The induced kernel on X is
//! p(x, x') = q(exo(x), {e': f(x, e') = x'}), so its rows are exact sums of
//! q-rows over a partition of shocks.
//!
//! The ergodicity check searches for a collapse witness: a shock e* whose
//! n-fold iterated law sends every state of the law's range K to a single
//! state x*, together with eps = min_e q(e, {e*}) > 0. Such a witness
//! forces p^(n)(x, {x*}) >= eps^n for every x in K, which pins a unique
//! ergodic class; the verdict pipeline runs the decomposition and a
//! small-set cross-check on top and reports the unique invariant measure.
//!
//! The trace chain of a kernel on a subset K sums the excursions through
//! the complement in closed form: with the blocks [[A, B], [C, D]] over
//! (K, complement), kernel_K = A + B (I - D)^-1 C. Only the complement
//! states actually reachable from K enter the solve, so unreachable
//! defective corners of the space cannot poison it; the construction
//! errors precisely when some closed class reachable from K avoids K.

use std::collections::BTreeSet;

use crate::conditions::{check_harris, Condition, ConditionReport, Witnesses};
use crate::decompose::{decompose, ErgodicDecomposition};
use crate::error::{Error, Result};
use crate::kernel::MarkovKernel;
use crate::linalg;
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::space::StateSpace;
use crate::structure::{analyze, reachable_within};

/// Shock kernel, product state space, and evolution law of one economy.
#[derive(Clone, Debug)]
pub struct EconomyModel<S: Scalar> {
    exo_space: StateSpace,
    endo_space: StateSpace,
    state_space: StateSpace,
    q: MarkovKernel<S>,
    /// law[x * |E| + e'] = index of f(x, e') in the state space.
    law: Vec<usize>,
}

impl<S: Scalar> EconomyModel<S> {
    /// Builds a model from an explicit law table, law[x * |E| + e'].
    /// Component labels must not contain '|', which separates them in the
    /// product labels "e|d".
    pub fn new(
        exo_space: StateSpace,
        endo_space: StateSpace,
        q: MarkovKernel<S>,
        law: Vec<usize>,
    ) -> Result<Self> {
        q.space().check_same(&exo_space, "shock kernel")?;
        for l in exo_space.labels().iter().chain(endo_space.labels()) {
            if l.contains('|') {
                return Err(Error::InvalidInput(format!(
                    "component label {l:?} contains '|', the product separator"
                )));
            }
        }
        let mut labels = Vec::with_capacity(exo_space.size() * endo_space.size());
        for e in exo_space.labels() {
            for d in endo_space.labels() {
                labels.push(format!("{e}|{d}"));
            }
        }
        let state_space = StateSpace::new(labels)?;
        let want = state_space.size() * exo_space.size();
        if law.len() != want {
            return Err(Error::InvalidInput(format!(
                "law table has {} entries, need {} (states times shocks)",
                law.len(),
                want
            )));
        }
        if let Some(&bad) = law.iter().find(|&&t| t >= state_space.size()) {
            return Err(Error::InvalidInput(format!(
                "law target index {bad} is out of range for {} states",
                state_space.size()
            )));
        }
        Ok(EconomyModel { exo_space, endo_space, state_space, q, law })
    }

    /// Builds the law table by evaluating a label-level function on every
    /// (state, shock) pair; each output must be a valid product label.
    pub fn from_law_fn(
        exo_space: StateSpace,
        endo_space: StateSpace,
        q: MarkovKernel<S>,
        mut f: impl FnMut(&str, &str) -> String,
    ) -> Result<Self> {
        let probe = Self::new(
            exo_space.clone(),
            endo_space.clone(),
            q.clone(),
            vec![0; exo_space.size() * endo_space.size() * exo_space.size()],
        )?;
        let mut law = Vec::with_capacity(probe.state_space.size() * exo_space.size());
        for x in 0..probe.state_space.size() {
            for e in 0..exo_space.size() {
                let target = f(probe.state_space.label(x), exo_space.label(e));
                law.push(probe.state_space.require(&target)?);
            }
        }
        Self::new(exo_space, endo_space, q, law)
    }

    pub fn exo_space(&self) -> &StateSpace {
        &self.exo_space
    }

    pub fn endo_space(&self) -> &StateSpace {
        &self.endo_space
    }

    pub fn state_space(&self) -> &StateSpace {
        &self.state_space
    }

    pub fn shock_kernel(&self) -> &MarkovKernel<S> {
        &self.q
    }

    /// Index of f(x, e') in the state space.
    pub fn law_target(&self, x: usize, shock: usize) -> usize {
        self.law[x * self.exo_space.size() + shock]
    }

    /// Exogenous component of a state index.
    pub fn exo_of(&self, x: usize) -> usize {
        x / self.endo_space.size()
    }

    /// Sorted range of the law over all (state, shock) pairs.
    pub fn law_range(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.law.iter().copied().collect();
        set.into_iter().collect()
    }

    /// Kernel on the product space: p(x, x') sums the probabilities of the
    /// shocks that the law sends to x', drawn from the row of the current
    /// exogenous component. Rows are stochastic because the shocks
    /// partition.
    pub fn induce_kernel(&self) -> MarkovKernel<S> {
        let n = self.state_space.size();
        let shocks = self.exo_space.size();
        let mut mat = Mat::<S>::zeros(n, n);
        for x in 0..n {
            let e = self.exo_of(x);
            for shock in 0..shocks {
                let target = self.law_target(x, shock);
                let cur = mat.get(x, target);
                mat.set(x, target, cur + self.q.prob(e, shock));
            }
        }
        MarkovKernel::new(self.state_space.clone(), mat)
            .expect("shock rows partition into stochastic rows")
    }

    /// Applies the law n times holding the shock fixed; n >= 1.
    pub fn iterate_law(&self, x: &str, shock: &str, n: u64) -> Result<String> {
        if n == 0 {
            return Err(Error::InvalidInput("iterate_law needs n >= 1".into()));
        }
        let mut cur = self.state_space.require(x)?;
        let e = self.exo_space.require(shock)?;
        for _ in 0..n {
            cur = self.law_target(cur, e);
        }
        Ok(self.state_space.label(cur).to_string())
    }

    /// Ergodicity hypotheses: (1) the law's range K absorbs every state in
    /// one step; (2) some shock e* collapses K to a single state x* after
    /// n <= n_max law iterations; (3) eps = min_e q(e, {e*}) > 0. The
    /// search runs over increasing n, then shock order, and selects the
    /// first candidate that also satisfies (3), since (3) depends only on
    /// the shock. Witnesses: K, e*, x*, n, eps.
    pub fn check_theorem2(&self, n_max: u64) -> Result<ConditionReport<S>> {
        if n_max == 0 {
            return Err(Error::InvalidInput("witness search needs n_max >= 1".into()));
        }
        let range = self.law_range();
        let shocks = self.exo_space.size();

        // Per shock: smallest n at which the range collapses, if any.
        // Collapse persists once reached (images of a singleton stay
        // singleton), so (3) failing for a shock rules out all its n.
        let mut candidates: Vec<(u64, usize, usize)> = Vec::new();
        for shock in 0..shocks {
            let mut images: Vec<usize> = range.clone();
            for n in 1..=n_max {
                for img in images.iter_mut() {
                    *img = self.law_target(*img, shock);
                }
                let first = images[0];
                if images.iter().all(|&i| i == first) {
                    candidates.push((n, shock, first));
                    break;
                }
            }
        }
        candidates.sort();

        let eps_of = |shock: usize| {
            (0..shocks)
                .map(|e| self.q.prob(e, shock))
                .fold(S::infinity(), S::min)
        };

        let mut witnesses = Witnesses::default();
        witnesses.small_set = Some(
            range.iter().map(|&i| self.state_space.label(i).to_string()).collect(),
        );
        let mut diagnostics = vec![format!(
            "law range K has {} of {} states",
            range.len(),
            self.state_space.size()
        )];

        let chosen = candidates.iter().find(|&&(_, shock, _)| eps_of(shock) > S::zero());
        let satisfied = chosen.is_some();
        match chosen {
            Some(&(n, shock, x_star)) => {
                let eps = eps_of(shock);
                witnesses.collapse_shock = Some(self.exo_space.label(shock).to_string());
                witnesses.collapse_state = Some(self.state_space.label(x_star).to_string());
                witnesses.collapse_steps = Some(n);
                witnesses.eps = Some(eps);
                diagnostics.push(format!(
                    "shock {} collapses K to {} after {} law iterations; \
                     min_e q(e, {{{}}}) = {}",
                    self.exo_space.label(shock),
                    self.state_space.label(x_star),
                    n,
                    self.exo_space.label(shock),
                    eps.to_f64().unwrap_or(f64::NAN)
                ));
            }
            None if !candidates.is_empty() => {
                let (n, shock, _) = candidates[0];
                let row = (0..shocks)
                    .min_by(|&a, &b| {
                        self.q
                            .prob(a, shock)
                            .partial_cmp(&self.q.prob(b, shock))
                            .expect("kernel entries are finite")
                    })
                    .expect("at least one shock");
                diagnostics.push(format!(
                    "shock {} collapses K after {} iterations, but q({}, {{{}}}) = 0, \
                     so no collapsing shock recurs uniformly",
                    self.exo_space.label(shock),
                    n,
                    self.exo_space.label(row),
                    self.exo_space.label(shock),
                ));
            }
            None => {
                diagnostics.push(format!(
                    "no shock collapses K within {n_max} law iterations"
                ));
            }
        }
        Ok(ConditionReport { condition: Condition::Theorem2, satisfied, witnesses, diagnostics })
    }
}

/// Induced kernel, witness report, decomposition, and cross-check of one
/// ergodicity verdict.
#[derive(Clone, Debug)]
pub struct EconomyVerdict<S: Scalar> {
    /// The witness report, enriched with the class count and, when the
    /// verdict holds, the unique invariant measure.
    pub report: ConditionReport<S>,
    pub induced: MarkovKernel<S>,
    pub decomposition: ErgodicDecomposition<S>,
    /// Small-set cross-check on the witness set, run only on success.
    pub harris: Option<ConditionReport<S>>,
}

impl<S: Scalar> EconomyModel<S> {
    /// Full pipeline: induce the kernel, search witnesses, decompose, and
    /// on success report the unique invariant measure plus a small-set
    /// cross-check with K the law's range and k up to the collapse count.
    pub fn ergodicity_verdict(&self, n_max: u64) -> Result<EconomyVerdict<S>> {
        let induced = self.induce_kernel();
        let mut report = self.check_theorem2(n_max)?;
        let decomposition = decompose(&induced)?;
        let l = decomposition.class_count();
        report.witnesses.class_count = Some(l as u64);
        report.diagnostics.push(format!("decomposition finds {l} ergodic classes"));

        let mut harris = None;
        if report.satisfied {
            if l != 1 {
                return Err(Error::NumericalDegeneracy(format!(
                    "witnesses certify a unique ergodic class but the decomposition \
                     found {l}; the kernel construction is inconsistent"
                )));
            }
            report.witnesses.invariant_measure = Some(decomposition.invariant_measure(0).clone());
            let k_labels = report
                .witnesses
                .small_set
                .clone()
                .expect("range witness is always recorded");
            let n = report.witnesses.collapse_steps.expect("satisfied report has n");
            let cross = check_harris(&induced, &k_labels, n)?;
            if !cross.satisfied {
                return Err(Error::NumericalDegeneracy(
                    "collapse witness implies a small-set minorization, but the \
                     cross-check failed"
                        .into(),
                ));
            }
            report
                .diagnostics
                .push("small-set cross-check on the witness set: satisfied".into());
            harris = Some(cross);
        }
        Ok(EconomyVerdict { report, induced, decomposition, harris })
    }
}

/// Chain watched only while in K, with excursions through the complement
/// collapsed into single steps.
#[derive(Clone, Debug)]
pub struct TraceChain<S: Scalar> {
    base: MarkovKernel<S>,
    k_indices: Vec<usize>,
    kernel_k: MarkovKernel<S>,
}

impl<S: Scalar> TraceChain<S> {
    pub fn base(&self) -> &MarkovKernel<S> {
        &self.base
    }

    /// Indices of K in the base space, ascending.
    pub fn k_indices(&self) -> &[usize] {
        &self.k_indices
    }

    /// The stopped kernel on K's own state space.
    pub fn kernel(&self) -> &MarkovKernel<S> {
        &self.kernel_k
    }
}

/// Builds the trace chain of a kernel on the subset K: excursions through
/// the complement are summed in closed form, kernel_K = A + B (I-D)^-1 C
/// over the blocks of (K, complement restricted to states reachable from
/// K). Errors when a closed class reachable from K avoids K, since the
/// chain then fails to return with probability 1.
pub fn trace_chain<S: Scalar>(
    kernel: &MarkovKernel<S>,
    k_labels: &[impl AsRef<str>],
) -> Result<TraceChain<S>> {
    if k_labels.is_empty() {
        return Err(Error::InvalidInput("trace chain needs a nonempty subset".into()));
    }
    let k_indices = kernel.space().subset(k_labels)?;
    let n = kernel.size();
    let in_k = {
        let mut v = vec![false; n];
        for &i in &k_indices {
            v[i] = true;
        }
        v
    };

    // Complement states reachable from K without re-entering K; only they
    // take part in excursions.
    let seeds: Vec<usize> = (0..n)
        .filter(|&y| !in_k[y] && k_indices.iter().any(|&x| kernel.prob(x, y) > S::zero()))
        .collect();
    let allowed: Vec<bool> = in_k.iter().map(|&b| !b).collect();
    let reachable = reachable_within(kernel, &seeds, &allowed);

    for class in &analyze(kernel).classes {
        let escapes = class.states.iter().all(|&s| !in_k[s])
            && class.states.iter().any(|&s| reachable[s]);
        if escapes {
            let names: Vec<String> = class
                .states
                .iter()
                .map(|&s| kernel.space().label(s).to_string())
                .collect();
            return Err(Error::NonReturning(format!(
                "closed class {{{}}} is reachable from K but never returns to it",
                names.join(", ")
            )));
        }
    }

    let r: Vec<usize> = (0..n).filter(|&i| reachable[i]).collect();
    let k = k_indices.len();
    let a = Mat::from_fn(k, k, |i, j| kernel.prob(k_indices[i], k_indices[j]));
    let folded = if r.is_empty() {
        a
    } else {
        let m = r.len();
        let d = Mat::from_fn(m, m, |i, j| {
            let v = -kernel.prob(r[i], r[j]);
            if i == j {
                v + S::one()
            } else {
                v
            }
        });
        let c = Mat::from_fn(m, k, |i, j| kernel.prob(r[i], k_indices[j]));
        let folded_c = linalg::solve(&d, &c)?;
        let b = Mat::from_fn(k, m, |i, j| kernel.prob(k_indices[i], r[j]));
        a.add(&b.matmul(&folded_c))
    };

    let labels: Vec<String> = k_indices
        .iter()
        .map(|&i| kernel.space().label(i).to_string())
        .collect();
    let kernel_k = MarkovKernel::new_renormalized(StateSpace::new(labels)?, folded)?;
    Ok(TraceChain { base: kernel.clone(), k_indices, kernel_k })
}
