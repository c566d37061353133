//! Transportation network simplex on the complete bipartite graph.
//!
//! Works over any [`Scalar`]; with the rational backend every pivot is
//! exact. The basis tree (m + n - 1 cells) is kept sparse and costs are
//! evaluated on demand, so memory stays linear in the number of points
//! even for grids with thousands of them. Entering cells are chosen by
//! the most negative reduced cost, switching to Bland's rule (first
//! eligible) after a run of degenerate pivots, which guarantees
//! termination.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::num::Scalar;

pub(super) struct SolvedTransport<S> {
    /// Positive flows, keyed by (source slot, sink slot).
    pub flows: BTreeMap<(usize, usize), S>,
    /// Dual value per source slot.
    pub source_potential: Vec<S>,
    /// Dual value per sink slot; `u_i + v_j = c_ij` on basic cells.
    pub sink_potential: Vec<S>,
}

struct Basis<S> {
    /// Basic cells with their flows (zero flow allowed for degenerate cells).
    flow: BTreeMap<(usize, usize), S>,
    /// Basic sink slots per source slot.
    rows: Vec<Vec<usize>>,
    /// Basic source slots per sink slot.
    cols: Vec<Vec<usize>>,
}

impl<S: Scalar> Basis<S> {
    fn new(m: usize, n: usize) -> Self {
        Basis {
            flow: BTreeMap::new(),
            rows: vec![Vec::new(); m],
            cols: vec![Vec::new(); n],
        }
    }

    fn insert(&mut self, cell: (usize, usize), amount: S) {
        self.rows[cell.0].push(cell.1);
        self.cols[cell.1].push(cell.0);
        self.flow.insert(cell, amount);
    }

    fn remove(&mut self, cell: (usize, usize)) {
        self.rows[cell.0].retain(|&j| j != cell.1);
        self.cols[cell.1].retain(|&i| i != cell.0);
        self.flow.remove(&cell);
    }
}

pub(super) fn solve<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    sources: &[(usize, S)],
    sinks: &[(usize, S)],
) -> Result<SolvedTransport<S>> {
    let m = sources.len();
    let n = sinks.len();
    debug_assert!(m > 0 && n > 0);

    let cost = |i: usize, j: usize| space.dist(sources[i].0, sinks[j].0);
    let pivot_tol = if S::EXACT {
        S::zero()
    } else {
        let mut max_cost = S::zero();
        for i in 0..m {
            for j in 0..n {
                let c = cost(i, j);
                if c > max_cost {
                    max_cost = c;
                }
            }
        }
        S::from_ratio(1, 1_000_000_000_000i64) * (S::one() + max_cost)
    };

    // Northwest-corner start: marks exactly m + n - 1 basic cells and, on
    // line spaces with coordinate-sorted supports, is already the monotone
    // (optimal) plan.
    let mut basis = Basis::new(m, n);
    let mut supply: Vec<S> = sources.iter().map(|(_, w)| w.clone()).collect();
    let mut demand: Vec<S> = sinks.iter().map(|(_, w)| w.clone()).collect();
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let f = if supply[i] <= demand[j] {
            supply[i].clone()
        } else {
            demand[j].clone()
        };
        supply[i] -= f.clone();
        demand[j] -= f.clone();
        basis.insert((i, j), f);
        if i == m - 1 && j == n - 1 {
            break;
        }
        if supply[i].is_zero() && i + 1 < m {
            i += 1;
        } else if j + 1 < n {
            j += 1;
        } else {
            i += 1;
        }
    }

    let mut u = vec![S::zero(); m];
    let mut v = vec![S::zero(); n];
    let mut bland = false;
    let mut degenerate_run = 0usize;
    let iteration_cap = 1000 + 40 * (m + n) * (m + n);

    for _ in 0..iteration_cap {
        compute_potentials(&cost, &basis, &mut u, &mut v)?;

        // Basic cells have reduced cost exactly zero by construction (and
        // below the pivot tolerance in float mode), so the scan does not
        // need to exclude them.
        let entering = find_entering(&cost, m, n, &u, &v, &pivot_tol, bland);
        let (ei, ej) = match entering {
            Some(cell) => cell,
            None => {
                let flows = basis
                    .flow
                    .iter()
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(&cell, w)| (cell, w.clone()))
                    .collect();
                return Ok(SolvedTransport {
                    flows,
                    source_potential: u,
                    sink_potential: v,
                });
            }
        };

        let cycle = basis_cycle(&basis, m, ei, ej)?;

        // signs alternate around the cycle, + at the entering cell
        let mut theta: Option<(S, (usize, usize))> = None;
        for (k, &cell) in cycle.iter().enumerate() {
            if k % 2 == 1 {
                let candidate = basis.flow[&cell].clone();
                let replace = match &theta {
                    None => true,
                    Some((best, best_cell)) => {
                        candidate < *best || (candidate == *best && cell < *best_cell)
                    }
                };
                if replace {
                    theta = Some((candidate, cell));
                }
            }
        }
        let (theta, leaving) =
            theta.ok_or_else(|| Error::Internal("pivot cycle has no leaving cell".into()))?;

        if theta.is_zero() {
            degenerate_run += 1;
            if degenerate_run > 50 {
                bland = true;
            }
        } else {
            degenerate_run = 0;
        }

        basis.insert((ei, ej), S::zero());
        for (k, cell) in cycle.iter().enumerate() {
            let entry = basis
                .flow
                .get_mut(cell)
                .ok_or_else(|| Error::Internal("cycle cell left the basis".into()))?;
            if k % 2 == 0 {
                *entry += theta.clone();
            } else {
                *entry -= theta.clone();
            }
        }
        basis.remove(leaving);
    }

    Err(Error::Internal(
        "transport simplex exceeded its iteration cap".into(),
    ))
}

/// Solve `u_i + v_j = c_ij` over the basis tree, rooted at `u_0 = 0`.
fn compute_potentials<S, C>(cost: &C, basis: &Basis<S>, u: &mut [S], v: &mut [S]) -> Result<()>
where
    S: Scalar,
    C: Fn(usize, usize) -> S,
{
    let m = u.len();
    let mut known_u = vec![false; m];
    let mut known_v = vec![false; v.len()];
    u[0] = S::zero();
    known_u[0] = true;
    // nodes 0..m are sources, m..m+n sinks
    let mut stack = vec![0usize];
    while let Some(node) = stack.pop() {
        if node < m {
            for &j in &basis.rows[node] {
                if !known_v[j] {
                    v[j] = cost(node, j) - u[node].clone();
                    known_v[j] = true;
                    stack.push(m + j);
                }
            }
        } else {
            let j = node - m;
            for &i in &basis.cols[j] {
                if !known_u[i] {
                    u[i] = cost(i, j) - v[j].clone();
                    known_u[i] = true;
                    stack.push(i);
                }
            }
        }
    }
    if known_u.iter().all(|&k| k) && known_v.iter().all(|&k| k) {
        Ok(())
    } else {
        Err(Error::Internal(
            "basis does not span the bipartite graph".into(),
        ))
    }
}

#[allow(clippy::needless_range_loop)]
fn find_entering<S, C>(
    cost: &C,
    m: usize,
    n: usize,
    u: &[S],
    v: &[S],
    pivot_tol: &S,
    bland: bool,
) -> Option<(usize, usize)>
where
    S: Scalar,
    C: Fn(usize, usize) -> S,
{
    let threshold = -pivot_tol.clone();
    let mut best: Option<((usize, usize), S)> = None;
    for i in 0..m {
        for j in 0..n {
            let reduced = cost(i, j) - u[i].clone() - v[j].clone();
            if reduced < threshold {
                if bland {
                    return Some((i, j));
                }
                match &best {
                    Some((_, r)) if reduced >= *r => {}
                    _ => best = Some(((i, j), reduced)),
                }
            }
        }
    }
    best.map(|(cell, _)| cell)
}

/// The unique cycle created by adding `(ei, ej)` to the basis tree, listed
/// starting at the entering cell and alternating +/- positions.
fn basis_cycle<S: Scalar>(
    basis: &Basis<S>,
    m: usize,
    ei: usize,
    ej: usize,
) -> Result<Vec<(usize, usize)>> {
    // path from sink node m+ej back to source node ei through the tree
    let n = basis.cols.len();
    let total = m + n;
    let mut parent: Vec<Option<(usize, (usize, usize))>> = vec![None; total];
    let mut visited = vec![false; total];
    visited[ei] = true;
    let mut stack = vec![ei];
    while let Some(node) = stack.pop() {
        if node == m + ej {
            break;
        }
        if node < m {
            for &j in &basis.rows[node] {
                if !visited[m + j] {
                    visited[m + j] = true;
                    parent[m + j] = Some((node, (node, j)));
                    stack.push(m + j);
                }
            }
        } else {
            let j = node - m;
            for &i in &basis.cols[j] {
                if !visited[i] {
                    visited[i] = true;
                    parent[i] = Some((node, (i, j)));
                    stack.push(i);
                }
            }
        }
    }
    if !visited[m + ej] {
        return Err(Error::Internal("entering cell closes no cycle".into()));
    }
    let mut cells = vec![(ei, ej)];
    let mut node = m + ej;
    while node != ei {
        let (prev, cell) =
            parent[node].ok_or_else(|| Error::Internal("broken tree path".into()))?;
        cells.push(cell);
        node = prev;
    }
    Ok(cells)
}
