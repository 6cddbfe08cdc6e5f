//! Exact structure of the support digraph of a kernel.
//!
//! An edge x -> y exists iff p(x, y) > 0, with no epsilon threshold:
//! closedness of a class is a structural property and thresholding tiny
//! probabilities would silently change the decomposition. Strongly
//! connected components come from an iterative Tarjan pass; a component is
//! a closed (recurrent) class when no edge leaves it, and every other state
//! is transient. Each closed class carries its period d, the gcd of its
//! cycle lengths, and a phase for every member state: edges inside the
//! class always advance the phase by 1 mod d, which is what the cyclic
//! (rotating) eigenvector construction of the peripheral spectrum needs.

use crate::kernel::MarkovKernel;
use crate::scalar::Scalar;

/// One closed class with its periodic structure.
#[derive(Clone, Debug)]
pub struct ClosedClass {
    /// Member states, ascending.
    pub states: Vec<usize>,
    /// Period d >= 1: gcd of all cycle lengths through the class.
    pub period: u64,
    /// Phase of each member, aligned with `states`; edges map phase m to
    /// phase m + 1 mod d.
    pub phases: Vec<u64>,
}

/// Closed classes plus the transient remainder of a kernel.
#[derive(Clone, Debug)]
pub struct ChainStructure {
    /// Closed classes ordered by smallest contained state index.
    pub classes: Vec<ClosedClass>,
    /// Transient states, ascending.
    pub transient: Vec<usize>,
    /// For each state: Some(class position) or None when transient.
    pub class_of: Vec<Option<usize>>,
}

impl ChainStructure {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }
}

/// Adjacency lists of the support digraph.
fn support_edges<S: Scalar>(kernel: &MarkovKernel<S>) -> Vec<Vec<usize>> {
    let n = kernel.size();
    (0..n)
        .map(|x| (0..n).filter(|&y| kernel.prob(x, y) > S::zero()).collect())
        .collect()
}

/// Iterative Tarjan SCC; returns component id per state, ids in reverse
/// topological order of the condensation.
fn tarjan_sccs(adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let n = adj.len();
    const UNSET: usize = usize::MAX;
    let mut index = vec![UNSET; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comp = vec![UNSET; n];
    let mut next_index = 0usize;
    let mut comp_count = 0usize;

    // Explicit DFS frames: (vertex, next child position).
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != UNSET {
            continue;
        }
        frames.push((start, 0));
        index[start] = next_index;
        lowlink[start] = next_index;
        next_index += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            if *child < adj[v].len() {
                let w = adj[v][*child];
                *child += 1;
                if index[w] == UNSET {
                    index[w] = next_index;
                    lowlink[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] && index[w] < lowlink[v] {
                    lowlink[v] = index[w];
                }
            } else {
                frames.pop();
                if let Some(&(parent, _)) = frames.last() {
                    if lowlink[v] < lowlink[parent] {
                        lowlink[parent] = lowlink[v];
                    }
                }
                if lowlink[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = comp_count;
                        if w == v {
                            break;
                        }
                    }
                    comp_count += 1;
                }
            }
        }
    }
    (comp, comp_count)
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Period and phases of one closed class via BFS levels: the gcd of
/// level(u) + 1 - level(v) over intra-class edges divides every cycle
/// length, and levels mod the gcd give consistent phases.
fn class_period(states: &[usize], adj: &[Vec<usize>]) -> (u64, Vec<u64>) {
    let pos: std::collections::HashMap<usize, usize> =
        states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let k = states.len();
    let mut level = vec![i64::MIN; k];
    level[0] = 0;
    let mut queue = std::collections::VecDeque::from([0usize]);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    while let Some(u) = queue.pop_front() {
        for &t in &adj[states[u]] {
            let v = pos[&t]; // closed class: every edge stays inside
            edges.push((u, v));
            if level[v] == i64::MIN {
                level[v] = level[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let mut g: u64 = 0;
    for &(u, v) in &edges {
        let diff = (level[u] + 1 - level[v]).unsigned_abs();
        g = gcd(g, diff);
    }
    // A class with a single self-loop state has diff 0 everywhere: period 1.
    let d = if g == 0 { 1 } else { g };
    let phases = level
        .iter()
        .map(|&l| (l.rem_euclid(d as i64)) as u64)
        .collect();
    (d, phases)
}

/// Full structural analysis of a kernel.
pub fn analyze<S: Scalar>(kernel: &MarkovKernel<S>) -> ChainStructure {
    let n = kernel.size();
    let adj = support_edges(kernel);
    let (comp, comp_count) = tarjan_sccs(&adj);

    // A component is closed when no edge leaves it.
    let mut closed = vec![true; comp_count];
    for x in 0..n {
        for &y in &adj[x] {
            if comp[x] != comp[y] {
                closed[comp[x]] = false;
            }
        }
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); comp_count];
    for x in 0..n {
        members[comp[x]].push(x);
    }

    let mut class_sets: Vec<Vec<usize>> = (0..comp_count)
        .filter(|&c| closed[c])
        .map(|c| members[c].clone())
        .collect();
    class_sets.sort_by_key(|s| s[0]);

    let mut class_of = vec![None; n];
    let mut classes = Vec::with_capacity(class_sets.len());
    for (pos, states) in class_sets.into_iter().enumerate() {
        for &s in &states {
            class_of[s] = Some(pos);
        }
        let (period, phases) = class_period(&states, &adj);
        classes.push(ClosedClass { states, period, phases });
    }
    let transient = (0..n).filter(|&s| class_of[s].is_none()).collect();

    ChainStructure { classes, transient, class_of }
}

/// States of `allowed` reachable from `seeds` through edges staying inside
/// `allowed`; seeds themselves are already inside `allowed`.
pub fn reachable_within<S: Scalar>(
    kernel: &MarkovKernel<S>,
    seeds: &[usize],
    allowed: &[bool],
) -> Vec<bool> {
    let n = kernel.size();
    let mut seen = vec![false; n];
    let mut queue: Vec<usize> = Vec::new();
    for &s in seeds {
        if allowed[s] && !seen[s] {
            seen[s] = true;
            queue.push(s);
        }
    }
    while let Some(x) = queue.pop() {
        for y in 0..n {
            if kernel.prob(x, y) > S::zero() && allowed[y] && !seen[y] {
                seen[y] = true;
                queue.push(y);
            }
        }
    }
    seen
}
