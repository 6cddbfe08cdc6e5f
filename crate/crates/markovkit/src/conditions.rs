//! Sufficient-condition checkers with explicit, replayable witnesses.
//!
//! Four conditions guarantee strong ergodic behavior of a kernel:
//!
//! * one-step uniform minorization: p(x, .) >= eps mu(.) for all x, with a
//!   single probability measure mu (the strongest and simplest);
//! * small-set minorization: a set K with uniformly bounded expected
//!   hitting time and a k-step minorization p^(k)(x, .) >= eps mu(.) on K;
//! * a norm-gap witness: ||p^(n) - V|| < 1 for the rank-one kernel V with
//!   constant row eps^n point mass, which makes the n-step operator a
//!   small perturbation of a finite-rank one;
//! * uniform integrability of a density family against cell weights.
//!
//! Each check returns a report whose witnesses are concrete numbers and
//! measures; the replay functions re-verify the defining inequalities from
//! the report alone, so a report can be audited without rerunning the
//! search. Witness inequalities replay within a fixed tolerance; the
//! strict inequality of the k-step minorization is replayed as >= with
//! eps shrunk by one part in 1e12, since strictness on null sets is not
//! observable numerically.

use crate::error::{Error, Result};
use crate::kernel::{MarkovKernel, SignedMeasure};
use crate::matrix::Mat;
use crate::scalar::Scalar;
use crate::structure::analyze;

/// Which sufficient condition a report speaks about.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Condition {
    Doeblin,
    Harris,
    QsccWitness,
    UniformIntegrability,
    Theorem2,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Doeblin => "doeblin",
            Condition::Harris => "harris",
            Condition::QsccWitness => "qscc-witness",
            Condition::UniformIntegrability => "uniform-integrability",
            Condition::Theorem2 => "theorem2",
        }
    }
}

/// Named witness values; a check fills in the fields its condition uses.
#[derive(Clone, Debug, Default)]
pub struct Witnesses<S: Scalar> {
    /// Minorization constant.
    pub eps: Option<S>,
    /// Minorizing probability measure.
    pub minorizing_measure: Option<SignedMeasure<S>>,
    /// Small set K, as state labels.
    pub small_set: Option<Vec<String>>,
    /// Number of steps of the minorization or norm-gap power.
    pub k_steps: Option<u64>,
    /// Expected hitting times of K, one entry per state.
    pub hitting_times: Option<Vec<S>>,
    /// Operator-norm distance of p^(n) from the rank-one comparison kernel.
    pub norm_gap: Option<S>,
    /// Center state of the rank-one comparison kernel.
    pub center_state: Option<String>,
    /// Worst integrability threshold over the epsilon grid.
    pub sigma: Option<S>,
    /// (eps, sigma) pairs, one per grid entry.
    pub sigma_per_eps: Option<Vec<(S, S)>>,
    /// Shock label whose repeated application collapses the model state.
    pub collapse_shock: Option<String>,
    /// State every trajectory collapses to.
    pub collapse_state: Option<String>,
    /// Steps of the collapsing iteration.
    pub collapse_steps: Option<u64>,
    /// Unique invariant measure certified by the condition.
    pub invariant_measure: Option<SignedMeasure<S>>,
    /// Number of ergodic classes found.
    pub class_count: Option<u64>,
}

/// Outcome of one condition check.
#[derive(Clone, Debug)]
pub struct ConditionReport<S: Scalar> {
    pub condition: Condition,
    pub satisfied: bool,
    pub witnesses: Witnesses<S>,
    pub diagnostics: Vec<String>,
}

fn fmt<S: Scalar>(x: S) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// One-step uniform minorization via column minima: eps = sum_y min_x
/// p(x,y) is the largest constant admitting any minorizing measure, and
/// mu(y) = min_x p(x,y) / eps is the measure that attains it.
pub fn check_doeblin<S: Scalar>(kernel: &MarkovKernel<S>) -> ConditionReport<S> {
    let n = kernel.size();
    let minima: Vec<S> = (0..n)
        .map(|y| (0..n).map(|x| kernel.prob(x, y)).fold(S::infinity(), S::min))
        .collect();
    let eps = minima.iter().fold(S::zero(), |a, &b| a + b);
    let mut witnesses = Witnesses::default();
    witnesses.eps = Some(eps);
    let satisfied = eps > S::zero();
    let mut diagnostics = Vec::new();
    if satisfied {
        let mu: Vec<S> = minima.iter().map(|&m| m / eps).collect();
        witnesses.minorizing_measure =
            Some(SignedMeasure::new(kernel.space().clone(), mu).expect("same space"));
        diagnostics.push(format!(
            "column minima admit the one-step minorization p(x,.) >= {} mu(.)",
            fmt(eps)
        ));
    } else {
        diagnostics.push(
            "every state has probability 0 under some row; no one-step minorization exists"
                .into(),
        );
    }
    ConditionReport { condition: Condition::Doeblin, satisfied, witnesses, diagnostics }
}

/// Small-set condition: expected hitting times of K are uniformly bounded
/// and some k-step transition from K admits a minorization. Hitting times
/// count at least one step, so with K the whole space they are all 1 and
/// the k = 1 minorization reproduces the one-step check exactly.
pub fn check_harris<S: Scalar>(
    kernel: &MarkovKernel<S>,
    k_labels: &[impl AsRef<str>],
    k_max: u64,
) -> Result<ConditionReport<S>> {
    if k_labels.is_empty() {
        return Err(Error::InvalidInput("small set K must be nonempty".into()));
    }
    if k_max == 0 {
        return Err(Error::InvalidInput("k_max must be at least 1".into()));
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

    let mut diagnostics = Vec::new();
    let structure = analyze(kernel);
    let escaping: Vec<&crate::structure::ClosedClass> = structure
        .classes
        .iter()
        .filter(|c| c.states.iter().all(|&s| !in_k[s]))
        .collect();
    let hitting_finite = escaping.is_empty();
    let mut witnesses = Witnesses::default();
    witnesses.small_set = Some(k_indices.iter().map(|&i| kernel.space().label(i).to_string()).collect());

    if hitting_finite {
        // E_x tau = 1 + sum over y outside K of p(x,y) E_y tau, for every
        // x; the restriction to the complement is the linear system.
        let complement: Vec<usize> = (0..n).filter(|&i| !in_k[i]).collect();
        let h_c: Vec<S> = if complement.is_empty() {
            Vec::new()
        } else {
            let m = complement.len();
            let a = Mat::from_fn(m, m, |i, j| {
                let v = -kernel.prob(complement[i], complement[j]);
                if i == j {
                    v + S::one()
                } else {
                    v
                }
            });
            crate::linalg::solve_vec(&a, &vec![S::one(); m])?
        };
        let mut h = vec![S::zero(); n];
        for (&c, &val) in complement.iter().zip(&h_c) {
            h[c] = val;
        }
        let times: Vec<S> = (0..n)
            .map(|x| {
                complement
                    .iter()
                    .fold(S::one(), |acc, &y| acc + kernel.prob(x, y) * h[y])
            })
            .collect();
        let sup = times.iter().fold(S::zero(), |a, &b| a.max(b));
        diagnostics.push(format!("sup_x E_x tau_K = {}", fmt(sup)));
        witnesses.hitting_times = Some(times);
    } else {
        let names: Vec<String> = escaping[0]
            .states
            .iter()
            .map(|&s| kernel.space().label(s).to_string())
            .collect();
        diagnostics.push(format!(
            "closed class {{{}}} never reaches K; expected hitting times are infinite",
            names.join(", ")
        ));
    }

    // Smallest k <= k_max whose k-step transition minorizes uniformly
    // over the rows of K.
    let mut found: Option<(u64, S, Vec<S>)> = None;
    let mut power = kernel.matrix().clone();
    for k in 1..=k_max {
        let minima: Vec<S> = (0..n)
            .map(|y| k_indices.iter().map(|&x| power.get(x, y)).fold(S::infinity(), S::min))
            .collect();
        let eps = minima.iter().fold(S::zero(), |a, &b| a + b);
        if eps > S::zero() {
            found = Some((k, eps, minima.iter().map(|&m| m / eps).collect()));
            break;
        }
        if k < k_max {
            power = power.matmul(kernel.matrix());
        }
    }
    match &found {
        Some((k, eps, _)) => diagnostics.push(format!(
            "minorization holds at k = {k} with eps = {}",
            fmt(*eps)
        )),
        None => diagnostics.push(format!("no k-step minorization up to k_max = {k_max}")),
    }
    if let Some((k, eps, mu)) = found {
        witnesses.k_steps = Some(k);
        witnesses.eps = Some(eps);
        witnesses.minorizing_measure =
            Some(SignedMeasure::new(kernel.space().clone(), mu).expect("same space"));
    }

    let satisfied = hitting_finite && witnesses.eps.is_some();
    Ok(ConditionReport { condition: Condition::Harris, satisfied, witnesses, diagnostics })
}

/// Norm-gap witness: with V the kernel whose every row is eps^n times the
/// point mass at x_star, computes ||p^(n) - V|| = max_x sum_y |p^(n)(x,y)
/// - eps^n 1{y = x_star}|; a gap below 1 makes p^(n) a small perturbation
/// of a rank-one operator. eps must lie in (0, 1].
pub fn check_qscc_witness<S: Scalar>(
    kernel: &MarkovKernel<S>,
    x_star: &str,
    eps: S,
    n: u64,
) -> Result<ConditionReport<S>> {
    if !(eps > S::zero() && eps <= S::one()) {
        return Err(Error::InvalidInput(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidInput("step count n must be at least 1".into()));
    }
    let star = kernel.space().require(x_star)?;
    let power = kernel.matrix().pow(n);
    let mut eps_n = S::one();
    for _ in 0..n {
        eps_n = eps_n * eps;
        if eps_n == S::zero() {
            break;
        }
    }
    let size = kernel.size();
    let mut gap = S::zero();
    for x in 0..size {
        let mut row = S::zero();
        for y in 0..size {
            let v = if y == star { eps_n } else { S::zero() };
            row = row + (power.get(x, y) - v).abs();
        }
        gap = gap.max(row);
    }
    let satisfied = gap < S::one();
    let mut witnesses = Witnesses::default();
    witnesses.eps = Some(eps);
    witnesses.k_steps = Some(n);
    witnesses.center_state = Some(x_star.to_string());
    witnesses.norm_gap = Some(gap);
    let diagnostics = vec![format!(
        "||p^({n}) - V|| = {} against the rank-one kernel with row {} point mass at {x_star}",
        fmt(gap),
        fmt(eps_n)
    )];
    Ok(ConditionReport { condition: Condition::QsccWitness, satisfied, witnesses, diagnostics })
}

/// Largest sigma such that every cell set of weight below sigma carries
/// mass below eps in this row; the fractional greedy over cells sorted by
/// density is exact for that threshold. Rows whose total mass stays below
/// eps impose no constraint and cap sigma at the total cell weight.
fn row_sigma<S: Scalar>(densities: &[S], weights: &[S], eps: S) -> S {
    let mut order: Vec<usize> = (0..densities.len()).collect();
    order.sort_by(|&a, &b| densities[b].partial_cmp(&densities[a]).expect("validated finite"));
    let mut mass = S::zero();
    let mut weight = S::zero();
    for &i in &order {
        let d = densities[i];
        if d <= S::zero() {
            break;
        }
        let m = d * weights[i];
        if mass + m >= eps {
            return weight + (eps - mass) / d;
        }
        mass = mass + m;
        weight = weight + weights[i];
    }
    weights.iter().fold(S::zero(), |a, &b| a + b)
}

/// Uniform integrability of a family of densities over weighted cells:
/// for each eps in the grid, the largest sigma such that every cell set
/// with weight below sigma has mass below eps in every row. The reported
/// sigma witness is the worst (smallest) over the grid.
pub fn check_uniform_integrability<S: Scalar>(
    density: &Mat<S>,
    cell_weights: &[S],
    eps_grid: &[S],
) -> Result<ConditionReport<S>> {
    if density.ncols() != cell_weights.len() {
        return Err(Error::InvalidInput(format!(
            "density has {} cells per row but {} cell weights were given",
            density.ncols(),
            cell_weights.len()
        )));
    }
    if density.nrows() == 0 || density.ncols() == 0 {
        return Err(Error::InvalidInput("density array must be nonempty".into()));
    }
    if eps_grid.is_empty() {
        return Err(Error::InvalidInput("epsilon grid must be nonempty".into()));
    }
    for &w in cell_weights {
        if !(w > S::zero()) || !w.is_finite() {
            return Err(Error::InvalidInput(format!("cell weights must be positive, got {w}")));
        }
    }
    for x in 0..density.nrows() {
        let mut total = S::zero();
        for (t, &w) in cell_weights.iter().enumerate() {
            let d = density.get(x, t);
            if !(d >= S::zero()) || !d.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "density must be nonnegative and finite, row {x} cell {t} is {d}"
                )));
            }
            total = total + d * w;
        }
        if (total - S::one()).abs() > S::RENORMALIZE_TOL {
            return Err(Error::InvalidInput(format!(
                "density row {x} integrates to {} rather than 1",
                fmt(total)
            )));
        }
    }
    for &eps in eps_grid {
        if !(eps > S::zero()) || !eps.is_finite() {
            return Err(Error::InvalidInput(format!(
                "epsilon grid entries must be positive, got {eps}"
            )));
        }
    }

    let mut pairs = Vec::with_capacity(eps_grid.len());
    for &eps in eps_grid {
        let sigma = (0..density.nrows())
            .map(|x| row_sigma(density.row(x), cell_weights, eps))
            .fold(S::infinity(), S::min);
        pairs.push((eps, sigma));
    }
    let worst = pairs.iter().map(|&(_, s)| s).fold(S::infinity(), S::min);
    let satisfied = pairs.iter().all(|&(_, s)| s > S::zero());
    let mut witnesses = Witnesses::default();
    witnesses.sigma = Some(worst);
    witnesses.sigma_per_eps = Some(pairs.clone());
    let diagnostics = pairs
        .iter()
        .map(|&(e, s)| format!("eps = {} admits sigma = {}", fmt(e), fmt(s)))
        .collect();
    Ok(ConditionReport {
        condition: Condition::UniformIntegrability,
        satisfied,
        witnesses,
        diagnostics,
    })
}

fn want_satisfied<S: Scalar>(report: &ConditionReport<S>, condition: Condition) -> Result<()> {
    if report.condition != condition {
        return Err(Error::InvalidInput(format!(
            "report is about {}, not {}",
            report.condition.name(),
            condition.name()
        )));
    }
    if !report.satisfied {
        return Err(Error::InvalidInput(
            "only a satisfied report has witnesses to replay".into(),
        ));
    }
    Ok(())
}

fn missing(name: &str) -> Error {
    Error::InvalidInput(format!("report lacks the {name} witness"))
}

/// Replays p(x,y) >= eps mu(y) from the witnesses alone.
pub fn replay_doeblin<S: Scalar>(
    kernel: &MarkovKernel<S>,
    report: &ConditionReport<S>,
) -> Result<bool> {
    want_satisfied(report, Condition::Doeblin)?;
    let eps = report.witnesses.eps.ok_or_else(|| missing("eps"))?;
    let mu = report
        .witnesses
        .minorizing_measure
        .as_ref()
        .ok_or_else(|| missing("minorizing measure"))?;
    kernel.space().check_same(mu.space(), "replay_doeblin")?;
    let tol = S::REPLAY_TOL;
    if !(eps > S::zero()) || !mu.is_probability() {
        return Ok(false);
    }
    for x in 0..kernel.size() {
        for y in 0..kernel.size() {
            if kernel.prob(x, y) < eps * mu.weight(y) - tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Replays the hitting-time recursion and the k-step minorization on K.
pub fn replay_harris<S: Scalar>(
    kernel: &MarkovKernel<S>,
    report: &ConditionReport<S>,
) -> Result<bool> {
    want_satisfied(report, Condition::Harris)?;
    let w = &report.witnesses;
    let labels = w.small_set.as_ref().ok_or_else(|| missing("small set"))?;
    let times = w.hitting_times.as_ref().ok_or_else(|| missing("hitting times"))?;
    let k = w.k_steps.ok_or_else(|| missing("k"))?;
    let eps = w.eps.ok_or_else(|| missing("eps"))?;
    let mu = w.minorizing_measure.as_ref().ok_or_else(|| missing("minorizing measure"))?;
    kernel.space().check_same(mu.space(), "replay_harris")?;
    let k_indices = kernel.space().subset(labels)?;
    let n = kernel.size();
    if times.len() != n {
        return Err(Error::InvalidInput(format!(
            "hitting-time vector has {} entries for {n} states",
            times.len()
        )));
    }
    let tol = S::REPLAY_TOL;
    let in_k = {
        let mut v = vec![false; n];
        for &i in &k_indices {
            v[i] = true;
        }
        v
    };
    // E_x tau = 1 + sum over the complement of p(x,y) E_y tau, and the
    // times must be finite and at least 1.
    for x in 0..n {
        let mut rhs = S::one();
        for y in 0..n {
            if !in_k[y] {
                rhs = rhs + kernel.prob(x, y) * times[y];
            }
        }
        if !times[x].is_finite() || (times[x] - rhs).abs() > tol * rhs.max(S::one()) {
            return Ok(false);
        }
    }
    // Strict minorization is replayed as >= against eps shrunk by 1e-12.
    let eps_strict = eps * (S::one() - S::of(1e-12));
    if !(eps > S::zero()) || !mu.is_probability() {
        return Ok(false);
    }
    let power = kernel.matrix().pow(k);
    for &x in &k_indices {
        for y in 0..n {
            if power.get(x, y) < eps_strict * mu.weight(y) - tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Recomputes the norm gap from the witnesses and compares.
pub fn replay_qscc<S: Scalar>(
    kernel: &MarkovKernel<S>,
    report: &ConditionReport<S>,
) -> Result<bool> {
    want_satisfied(report, Condition::QsccWitness)?;
    let w = &report.witnesses;
    let x_star = w.center_state.as_ref().ok_or_else(|| missing("center state"))?;
    let eps = w.eps.ok_or_else(|| missing("eps"))?;
    let n = w.k_steps.ok_or_else(|| missing("n"))?;
    let gap = w.norm_gap.ok_or_else(|| missing("norm gap"))?;
    let fresh = check_qscc_witness(kernel, x_star, eps, n)?;
    let recomputed = fresh.witnesses.norm_gap.expect("check always records the gap");
    Ok((recomputed - gap).abs() <= S::REPLAY_TOL && gap < S::one())
}

/// Recomputes every (eps, sigma) pair from the density and compares.
pub fn replay_ui<S: Scalar>(
    density: &Mat<S>,
    cell_weights: &[S],
    report: &ConditionReport<S>,
) -> Result<bool> {
    want_satisfied(report, Condition::UniformIntegrability)?;
    let w = &report.witnesses;
    let pairs = w.sigma_per_eps.as_ref().ok_or_else(|| missing("sigma table"))?;
    let sigma = w.sigma.ok_or_else(|| missing("sigma"))?;
    let grid: Vec<S> = pairs.iter().map(|&(e, _)| e).collect();
    let fresh = check_uniform_integrability(density, cell_weights, &grid)?;
    let fresh_pairs = fresh.witnesses.sigma_per_eps.expect("check always records the table");
    let tol = S::REPLAY_TOL;
    if pairs.len() != fresh_pairs.len() {
        return Ok(false);
    }
    for (&(e0, s0), &(e1, s1)) in pairs.iter().zip(&fresh_pairs) {
        if (e0 - e1).abs() > tol || (s0 - s1).abs() > tol {
            return Ok(false);
        }
    }
    let worst = pairs.iter().map(|&(_, s)| s).fold(S::infinity(), S::min);
    Ok((worst - sigma).abs() <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::StateSpace;

    fn kernel(rows: &[Vec<f64>]) -> MarkovKernel<f64> {
        let labels: Vec<String> = (0..rows.len()).map(|i| format!("s{i}")).collect();
        MarkovKernel::from_rows(StateSpace::new(labels).unwrap(), rows).unwrap()
    }

    fn flat() -> MarkovKernel<f64> {
        kernel(&[vec![0.5, 0.5], vec![0.5, 0.5]])
    }

    fn mixing() -> MarkovKernel<f64> {
        kernel(&[vec![0.6, 0.4], vec![0.3, 0.7]])
    }

    fn cycle_with_gate() -> MarkovKernel<f64> {
        kernel(&[vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]])
    }

    #[test]
    fn flat_kernel_minorizes_with_full_mass() {
        let r = check_doeblin(&flat());
        assert!(r.satisfied);
        assert_eq!(r.witnesses.eps, Some(1.0));
        let mu = r.witnesses.minorizing_measure.as_ref().unwrap();
        assert_eq!(mu.weights(), &[0.5, 0.5]);
        assert!(replay_doeblin(&flat(), &r).unwrap());
    }

    #[test]
    fn identity_kernel_has_no_one_step_minorization() {
        let id = MarkovKernel::<f64>::identity(StateSpace::new(["a", "b"]).unwrap());
        let r = check_doeblin(&id);
        assert!(!r.satisfied);
        assert_eq!(r.witnesses.eps, Some(0.0));
        assert!(r.witnesses.minorizing_measure.is_none());
    }

    #[test]
    fn mixing_kernel_minorizes_with_column_minima() {
        let r = check_doeblin(&mixing());
        assert!(r.satisfied);
        assert!((r.witnesses.eps.unwrap() - 0.7).abs() < 1e-15);
        let mu = r.witnesses.minorizing_measure.as_ref().unwrap();
        assert!((mu.weight(0) - 3.0 / 7.0).abs() < 1e-15);
        assert!((mu.weight(1) - 4.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn replay_rejects_a_tampered_doeblin_report() {
        let mut r = check_doeblin(&mixing());
        r.witnesses.eps = Some(0.8);
        assert!(!replay_doeblin(&mixing(), &r).unwrap());
    }

    #[test]
    fn small_set_check_with_the_whole_space_reduces_to_one_step() {
        for k in [flat(), mixing()] {
            let d = check_doeblin(&k);
            let labels: Vec<String> = k.space().labels().to_vec();
            let h = check_harris(&k, &labels, 1).unwrap();
            assert_eq!(h.satisfied, d.satisfied);
            assert_eq!(h.witnesses.eps, d.witnesses.eps);
            assert_eq!(
                h.witnesses.minorizing_measure.as_ref().unwrap().weights(),
                d.witnesses.minorizing_measure.as_ref().unwrap().weights()
            );
            assert_eq!(h.witnesses.k_steps, Some(1));
            assert_eq!(h.witnesses.hitting_times, Some(vec![1.0; k.size()]));
        }
    }

    #[test]
    fn gated_cycle_needs_two_steps_to_minorize() {
        let k = cycle_with_gate();
        let r = check_harris(&k, &["s0", "s1"], 5).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.witnesses.k_steps, Some(2));
        assert!((r.witnesses.eps.unwrap() - 0.25).abs() < 1e-15);
        let mu = r.witnesses.minorizing_measure.as_ref().unwrap();
        assert_eq!(mu.weights(), &[1.0, 0.0, 0.0]);
        let times = r.witnesses.hitting_times.as_ref().unwrap();
        assert_eq!(times, &vec![1.0, 2.0, 1.0]);
        assert!(replay_harris(&k, &r).unwrap());
    }

    #[test]
    fn one_step_minorization_fails_on_the_gated_cycle() {
        let k = cycle_with_gate();
        let r = check_harris(&k, &["s0", "s1"], 1).unwrap();
        assert!(!r.satisfied, "k_max = 1 gives eps_1 = 0");
        assert!(r.witnesses.eps.is_none());
        assert!(r.witnesses.hitting_times.is_some(), "hitting times are still finite");
    }

    #[test]
    fn unreachable_small_set_is_diagnosed() {
        let id = MarkovKernel::<f64>::identity(StateSpace::new(["s0", "s1"]).unwrap());
        let r = check_harris(&id, &["s0"], 3).unwrap();
        assert!(!r.satisfied);
        assert!(r.witnesses.hitting_times.is_none());
        assert!(r.diagnostics.iter().any(|d| d.contains("s1")), "{:?}", r.diagnostics);
    }

    #[test]
    fn small_set_input_is_validated() {
        let k = flat();
        assert!(check_harris(&k, &["nope"], 1).is_err());
        assert!(check_harris::<f64>(&k, &[] as &[&str], 1).is_err());
        assert!(check_harris(&k, &["s0"], 0).is_err());
    }

    #[test]
    fn norm_gap_of_the_flat_kernel_is_one_half() {
        let r = check_qscc_witness(&flat(), "s0", 0.5, 1).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.witnesses.norm_gap, Some(0.5));
        assert!(replay_qscc(&flat(), &r).unwrap());
    }

    #[test]
    fn norm_gap_of_the_identity_kernel_reaches_two() {
        let id = MarkovKernel::<f64>::identity(StateSpace::new(["s0", "s1"]).unwrap());
        let r = check_qscc_witness(&id, "s0", 1.0, 1).unwrap();
        assert!(!r.satisfied);
        assert_eq!(r.witnesses.norm_gap, Some(2.0));
    }

    #[test]
    fn norm_gap_of_the_mixing_kernel_is_seven_tenths() {
        let r = check_qscc_witness(&mixing(), "s1", 0.3, 1).unwrap();
        assert!(r.satisfied);
        assert!((r.witnesses.norm_gap.unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn norm_gap_inputs_are_validated() {
        let k = mixing();
        for bad in [0.0, -0.5, 1.5] {
            assert!(check_qscc_witness(&k, "s0", bad, 1).is_err());
        }
        assert!(check_qscc_witness(&k, "s0", 0.5, 0).is_err());
        assert!(check_qscc_witness(&k, "zz", 0.5, 1).is_err());
    }

    #[test]
    fn uniform_density_has_sigma_equal_to_eps() {
        let density = Mat::<f64>::from_fn(1, 10, |_, _| 1.0);
        let weights = vec![0.1; 10];
        let r = check_uniform_integrability(&density, &weights, &[0.25]).unwrap();
        assert!(r.satisfied);
        assert!((r.witnesses.sigma.unwrap() - 0.25).abs() < 1e-15);
        assert!(replay_ui(&density, &weights, &r).unwrap());
    }

    #[test]
    fn density_spike_pins_sigma_to_the_spike_cell() {
        // All mass on a cell of weight 0.02: any set containing it carries
        // mass 1, so sigma cannot exceed that cell's weight.
        let density = Mat::from_rows(&[vec![50.0f64, 0.0, 0.0]]).unwrap();
        let weights = vec![0.02, 0.49, 0.49];
        let r = check_uniform_integrability(&density, &weights, &[0.5]).unwrap();
        let sigma = r.witnesses.sigma.unwrap();
        assert!(sigma <= 0.02 + 1e-15);
        assert!((sigma - 0.01).abs() < 1e-15, "fractional greedy gives 0.5 / 50");
    }

    #[test]
    fn sigma_is_the_minimum_over_rows() {
        let density = Mat::from_rows(&[
            vec![50.0f64, 0.0, 0.0],
            vec![0.0, 25.0, 0.0],
        ])
        .unwrap();
        let weights = vec![0.02, 0.04, 0.94];
        let r = check_uniform_integrability(&density, &weights, &[0.5]).unwrap();
        assert!((r.witnesses.sigma.unwrap() - 0.01).abs() < 1e-15, "min(0.01, 0.02)");
        let pairs = r.witnesses.sigma_per_eps.as_ref().unwrap();
        assert_eq!(pairs.len(), 1);
    }

    #[test]
    fn low_mass_rows_cap_sigma_at_the_total_weight() {
        let density = Mat::<f64>::from_fn(1, 4, |_, _| 1.0);
        let weights = vec![0.25; 4];
        let r = check_uniform_integrability(&density, &weights, &[2.0]).unwrap();
        assert!((r.witnesses.sigma.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn integrability_inputs_are_validated() {
        let ok = Mat::<f64>::from_fn(1, 2, |_, _| 1.0);
        let w = vec![0.5, 0.5];
        assert!(check_uniform_integrability(&ok, &w, &[]).is_err());
        assert!(check_uniform_integrability(&ok, &w, &[0.0]).is_err());
        assert!(check_uniform_integrability(&ok, &w, &[-0.1]).is_err());
        assert!(check_uniform_integrability(&ok, &vec![0.5, -0.5], &[0.1]).is_err());
        assert!(check_uniform_integrability(&ok, &vec![0.5], &[0.1]).is_err());
        let negative = Mat::from_rows(&[vec![2.5, -0.5]]).unwrap();
        assert!(check_uniform_integrability(&negative, &w, &[0.1]).is_err());
        let off = Mat::from_rows(&[vec![1.0, 0.5]]).unwrap();
        assert!(check_uniform_integrability(&off, &w, &[0.1]).is_err());
    }

    #[test]
    fn replay_refuses_unsatisfied_or_mismatched_reports() {
        let id = MarkovKernel::<f64>::identity(StateSpace::new(["a", "b"]).unwrap());
        let unsat = check_doeblin(&id);
        assert!(replay_doeblin(&id, &unsat).is_err());
        let wrong = check_doeblin(&flat());
        assert!(replay_harris(&flat(), &wrong).is_err());
    }

    #[test]
    fn minorization_bound_actually_mixes_geometrically() {
        // One-step minorization with constant eps forces variation distance
        // to the invariant measure to shrink like (1 - eps)^n.
        let k = mixing();
        let r = check_doeblin(&k);
        let eps = r.witnesses.eps.unwrap();
        let d = crate::decompose::decompose(&k).unwrap();
        assert_eq!(d.class_count(), 1);
        let mu_star = d.invariant_measure(0);
        for n in 1..=50u64 {
            let p_n = k.n_step(n);
            for x in 0..k.size() {
                let row = SignedMeasure::new(
                    k.space().clone(),
                    p_n.matrix().row(x).to_vec(),
                )
                .unwrap();
                let dist = row.variation_distance(mu_star).unwrap();
                let bound = 2.0 * (1.0 - eps).powi(n as i32) + 1e-9;
                assert!(dist <= bound, "n={n} x={x}: {dist} > {bound}");
            }
        }
    }
}
