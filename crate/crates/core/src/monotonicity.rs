//! Cyclical-monotonicity certification.
//!
//! A set of ordered pairs supports an optimal representation exactly when a
//! function in the unit ball has incremental quotient 1 on all of them. The
//! LP route solves that feasibility system as shortest-path potentials with
//! Bellman-Ford, returning either a witness function or a negative cycle
//! translated back into a violated cycle inequality. The brute-force route
//! enumerates every cyclic selection of pairs and serves as the oracle.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::free::{DeLeeuwMeasure, LipschitzFunction};
use crate::metric::FiniteMetricSpace;
use crate::num::Scalar;

pub const DEFAULT_BRUTEFORCE_CAP: usize = 8;

/// Outcome of a monotonicity check: a norming witness or a violated cycle.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityCertificate<S> {
    pub monotone: bool,
    /// Unit-ball function with quotient 1 on every checked pair.
    pub witness: Option<LipschitzFunction<S>>,
    /// Pairs `(x_1,y_1)..(x_n,y_n)` with
    /// `sum d(x_i, y_i) > sum d(x_i, y_{i+1})` (cyclically).
    pub violating_cycle: Option<Vec<(usize, usize)>>,
}

impl<S: Scalar> MonotonicityCertificate<S> {
    fn monotone(witness: LipschitzFunction<S>) -> Self {
        MonotonicityCertificate {
            monotone: true,
            witness: Some(witness),
            violating_cycle: None,
        }
    }

    fn violated(cycle: Vec<(usize, usize)>) -> Self {
        MonotonicityCertificate {
            monotone: false,
            witness: None,
            violating_cycle: Some(cycle),
        }
    }
}

/// Evaluate both sides of the cycle inequality for an ordered selection.
pub fn cycle_inequality_sides<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    pairs: &[(usize, usize)],
) -> (S, S) {
    let mut lhs = S::zero();
    let mut rhs = S::zero();
    let n = pairs.len();
    for (k, &(x, y)) in pairs.iter().enumerate() {
        lhs += space.dist(x, y);
        let y_next = pairs[(k + 1) % n].1;
        rhs += space.dist(x, y_next);
    }
    (lhs, rhs)
}

fn validate_pairs<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    pairs: &[(usize, usize)],
) -> Result<Vec<(usize, usize)>> {
    let mut set = BTreeSet::new();
    for &(x, y) in pairs {
        space.check_index(x)?;
        space.check_index(y)?;
        if x == y {
            return Err(Error::DiagonalPair { index: x });
        }
        set.insert((x, y));
    }
    Ok(set.into_iter().collect())
}

#[derive(Clone)]
struct ConstraintEdge<S> {
    from: usize,
    to: usize,
    weight: S,
    /// Tight edges stem from checked pairs and carry negative weight.
    tight_pair: Option<(usize, usize)>,
}

/// Feasibility of `{ lip_norm(f) <= 1, phi f = 1 on E, f(base) = 0 }` as a
/// shortest-path potential problem.
pub fn check_monotone_lp<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    pairs: &[(usize, usize)],
) -> Result<MonotonicityCertificate<S>> {
    let pairs = validate_pairs(space, pairs)?;
    let n = space.len();

    let mut edges: Vec<ConstraintEdge<S>> = Vec::with_capacity(n * n);
    for p in 0..n {
        for q in 0..n {
            if p != q {
                // f(p) - f(q) <= d(p, q)
                edges.push(ConstraintEdge {
                    from: q,
                    to: p,
                    weight: space.dist(p, q),
                    tight_pair: None,
                });
            }
        }
    }
    for &(x, y) in &pairs {
        // f(y) - f(x) <= -d(x, y), forcing phi f(x, y) = 1
        edges.push(ConstraintEdge {
            from: x,
            to: y,
            weight: -space.dist(x, y),
            tight_pair: Some((x, y)),
        });
    }

    // Bellman-Ford from a virtual source attached to every node with
    // weight 0 (realised by starting all distances at zero).
    let relax_slack = space.tol().clone() * (S::one() + space.diameter());
    let mut dist = vec![S::zero(); n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut changed_node = None;
    for round in 0..n {
        let mut changed = false;
        for (e_idx, e) in edges.iter().enumerate() {
            let candidate = dist[e.from].clone() + e.weight.clone();
            if candidate.clone() + relax_slack.clone() < dist[e.to] {
                dist[e.to] = candidate;
                pred[e.to] = Some(e_idx);
                changed = true;
                if round == n - 1 {
                    changed_node = Some(e.to);
                }
            }
        }
        if !changed {
            break;
        }
    }

    match changed_node {
        None => {
            let base = dist[space.base()].clone();
            let values = dist.into_iter().map(|v| v - base.clone()).collect();
            Ok(MonotonicityCertificate::monotone(LipschitzFunction::new(
                values,
            )))
        }
        Some(start) => {
            // walk predecessors n steps to land inside the negative cycle
            let mut node = start;
            for _ in 0..n {
                let e = pred[node]
                    .ok_or_else(|| Error::Internal("negative cycle without predecessor".into()))?;
                node = edges[e].from;
            }
            let mut cycle_edges = Vec::new();
            let cycle_start = node;
            loop {
                let e_idx = pred[node]
                    .ok_or_else(|| Error::Internal("negative cycle without predecessor".into()))?;
                cycle_edges.push(edges[e_idx].clone());
                node = edges[e_idx].from;
                if node == cycle_start {
                    break;
                }
            }
            // predecessor walk visits the cycle backwards
            cycle_edges.reverse();
            let mut tight: Vec<(usize, usize)> =
                cycle_edges.iter().filter_map(|e| e.tight_pair).collect();
            if tight.is_empty() {
                return Err(Error::Internal(
                    "negative cycle contains no tight edge".into(),
                ));
            }
            // reversing the traversal order turns the cycle weight bound
            // into the standard cross-sum inequality
            tight.reverse();
            Ok(MonotonicityCertificate::violated(tight))
        }
    }
}

/// Exhaustive oracle: check the cycle inequality over every nonempty subset
/// of the pairs and every cyclic order. Capped because of factorial growth.
pub fn check_monotone_bruteforce<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    pairs: &[(usize, usize)],
    cap: usize,
) -> Result<MonotonicityCertificate<S>> {
    let pairs = validate_pairs(space, pairs)?;
    if pairs.len() > cap {
        return Err(Error::BruteForceCapExceeded {
            size: pairs.len(),
            cap,
        });
    }
    let slack = space.tol().clone() * (S::one() + space.diameter());

    let k = pairs.len();
    for mask in 1u32..(1 << k) {
        let subset: Vec<(usize, usize)> = (0..k)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| pairs[b])
            .collect();
        // cyclic orders: first element fixed, permute the rest
        let mut rest: Vec<(usize, usize)> = subset[1..].to_vec();
        let head = subset[0];
        let mut found: Option<Vec<(usize, usize)>> = None;
        permute(&mut rest, 0, &mut |tail| {
            if found.is_some() {
                return;
            }
            let mut ordered = Vec::with_capacity(tail.len() + 1);
            ordered.push(head);
            ordered.extend_from_slice(tail);
            let (lhs, rhs) = cycle_inequality_sides(space, &ordered);
            if lhs > rhs + slack.clone() {
                found = Some(ordered);
            }
        });
        if let Some(cycle) = found {
            return Ok(MonotonicityCertificate::violated(cycle));
        }
    }

    // no violated cycle: a witness exists, built by the potential route
    let lp = check_monotone_lp(space, &pairs)?;
    match lp.witness {
        Some(w) => Ok(MonotonicityCertificate::monotone(w)),
        None => Err(Error::Internal(
            "enumeration found no violation but the potential system is infeasible".into(),
        )),
    }
}

fn permute<T: Copy, F: FnMut(&[T])>(items: &mut [T], start: usize, visit: &mut F) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// A positive discrete measure is an optimal representation of its element
/// exactly when its support is cyclically monotonic.
pub fn is_optimal_representation<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    mu: &DeLeeuwMeasure<S>,
) -> Result<(bool, MonotonicityCertificate<S>)> {
    let support = mu.support_pairs();
    let cert = check_monotone_lp(space, &support)?;
    Ok((cert.monotone, cert))
}

/// For consecutive support pairs `(x_0,x_1),...,(x_{n-1},x_n)` of an optimal
/// measure, every interior point must lie on the segment `[x_0, x_n]`.
pub fn chain_alignment<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    mu: &DeLeeuwMeasure<S>,
    chain: &[(usize, usize)],
) -> Result<bool> {
    if chain.is_empty() {
        return Ok(true);
    }
    for (k, &(x, y)) in chain.iter().enumerate() {
        if mu.weight(x, y).is_zero() {
            return Err(Error::PairNotInSupport { x, y });
        }
        if k + 1 < chain.len() && y != chain[k + 1].0 {
            return Err(Error::BrokenChain { position: k });
        }
    }
    let start = chain[0].0;
    let end = chain[chain.len() - 1].1;
    let segment = space.segment(start, end)?;
    for &(_, y) in &chain[..chain.len() - 1] {
        if !segment.contains(y) {
            return Ok(false);
        }
    }
    Ok(true)
}
