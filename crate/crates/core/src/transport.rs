//! Kantorovich solver: free norms, optimal couplings, dual norming
//! functions, the coupling-to-representation correspondence, and the
//! independent real-line norm oracle.
//!
//! The primal side is a transportation network simplex on the complete
//! bipartite graph over the two supports. The dual node potentials give a
//! function that is 1-Lipschitz on the union of supports and tight on every
//! support cell of the plan; a McShane extension spreads it to the rest of
//! the space and a shift makes it vanish at the base point.

use crate::error::{Error, Result};
use crate::extension::ExtensionProblem;
use crate::free::{
    jordan_split, Coupling, DeLeeuwMeasure, FreeElement, LipschitzFunction, PointMeasure,
};
use crate::metric::FiniteMetricSpace;
use crate::num::{within_tol, Scalar};

mod simplex;

/// Primal/dual solution of one transport problem.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSolution<S: Scalar> {
    /// Minimal transport cost.
    pub cost: S,
    /// Optimal plan with the prescribed marginals.
    pub coupling: Coupling<S>,
    /// Dual optimal function: 1-Lipschitz, zero at base, attains the cost.
    pub potential: LipschitzFunction<S>,
}

/// Minimal-cost coupling between two positive measures with equal totals.
pub fn optimal_coupling<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    plus: &PointMeasure<S>,
    minus: &PointMeasure<S>,
) -> Result<TransportSolution<S>> {
    let total_plus = plus.total();
    let total_minus = minus.total();
    if !within_tol(&total_plus, &total_minus, space.tol(), &total_plus) {
        return Err(Error::UnbalancedTotals {
            left: total_plus.to_text(),
            right: total_minus.to_text(),
        });
    }

    // Common mass stays in place at zero cost; solving the reduced problem
    // keeps the dual potential consistent at shared support points.
    let mut coupling = Coupling::empty();
    let mut residual_plus = PointMeasure::zero();
    let mut residual_minus = PointMeasure::zero();
    for (i, w) in plus.weights() {
        let other = minus.weight(i);
        if other.is_zero() {
            residual_plus.insert_mass(i, w.clone());
        } else if *w > other {
            coupling.insert_mass((i, i), other.clone());
            residual_plus.insert_mass(i, w.clone() - other);
        } else {
            coupling.insert_mass((i, i), w.clone());
        }
    }
    for (j, w) in minus.weights() {
        let other = plus.weight(j);
        if *w > other {
            residual_minus.insert_mass(j, w.clone() - other);
        }
    }

    let sources: Vec<(usize, S)> = residual_plus
        .weights()
        .map(|(i, w)| (i, w.clone()))
        .collect();
    let sinks: Vec<(usize, S)> = residual_minus
        .weights()
        .map(|(j, w)| (j, w.clone()))
        .collect();

    if sources.is_empty() && sinks.is_empty() {
        return Ok(TransportSolution {
            cost: S::zero(),
            coupling,
            potential: LipschitzFunction::zero(space),
        });
    }
    if sources.is_empty() || sinks.is_empty() {
        // totals matched only within tolerance; nothing to pair the residual with
        return Err(Error::UnbalancedTotals {
            left: residual_plus.total().to_text(),
            right: residual_minus.total().to_text(),
        });
    }

    let solved = simplex::solve(space, &sources, &sinks)?;
    let mut cost = S::zero();
    for (&(i, j), w) in &solved.flows {
        coupling.insert_mass((sources[i].0, sinks[j].0), w.clone());
        cost += space.dist(sources[i].0, sinks[j].0) * w.clone();
    }

    // Potential on the supports: u on sources, -v on sinks. Tree-tight cells
    // give incremental quotient exactly 1; triangle inequality makes the
    // values 1-Lipschitz across the whole union.
    let mut anchored: Vec<(usize, S)> = Vec::new();
    for (i, (point, _)) in sources.iter().enumerate() {
        anchored.push((*point, solved.source_potential[i].clone()));
    }
    for (j, (point, _)) in sinks.iter().enumerate() {
        anchored.push((*point, -solved.sink_potential[j].clone()));
    }
    let problem = ExtensionProblem::new_unchecked(anchored);
    let extended = problem.mcshane_upper_all(space)?;
    let potential = extended.rebased(space)?;

    Ok(TransportSolution {
        cost,
        coupling,
        potential,
    })
}

/// Free-space norm of `m` together with a norming function.
pub fn free_norm<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    m: &FreeElement<S>,
) -> Result<(S, LipschitzFunction<S>)> {
    if m.is_zero() {
        return Ok((S::zero(), LipschitzFunction::zero(space)));
    }
    let (plus, minus) = jordan_split(space, m);
    let solution = optimal_coupling(space, &plus, &minus)?;
    Ok((solution.cost, solution.potential))
}

/// Reweight a coupling into a de Leeuw measure: `mu(x,y) = d(x,y) pi(x,y)`.
/// Diagonal cells carry zero cost and are dropped.
pub fn coupling_to_deleeuw<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    pi: &Coupling<S>,
) -> DeLeeuwMeasure<S> {
    let mut mu = DeLeeuwMeasure::empty();
    for ((x, y), w) in pi.pairs() {
        if x != y {
            mu.insert_mass((x, y), space.dist(x, y) * w.clone());
        }
    }
    mu
}

/// Norm-optimal discrete representation of `m` with disjoint left and right
/// supports.
pub fn decompose<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    m: &FreeElement<S>,
) -> Result<DeLeeuwMeasure<S>> {
    if m.is_zero() {
        return Ok(DeLeeuwMeasure::empty());
    }
    let (plus, minus) = jordan_split(space, m);
    let solution = optimal_coupling(space, &plus, &minus)?;
    Ok(coupling_to_deleeuw(space, &solution.coupling))
}

/// Wasserstein-1 distance between positive measures with equal totals.
pub fn wasserstein1<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    alpha: &PointMeasure<S>,
    beta: &PointMeasure<S>,
) -> Result<S> {
    Ok(optimal_coupling(space, alpha, beta)?.cost)
}

/// Exact norm oracle on spaces built from line points: the L1 norm of the
/// step density whose distributional derivative is the represented measure.
/// Independent of the transport solver.
pub fn line_norm<S: Scalar>(space: &FiniteMetricSpace<S>, m: &FreeElement<S>) -> Result<S> {
    let coords = space.line_coords().ok_or(Error::NotLineSpace)?;
    for (i, _) in m.weights() {
        space.check_index(i)?;
    }
    // balancing weight at the base makes the signed measure sum to zero
    let mut balance = S::zero();
    for (_, w) in m.weights() {
        balance -= w.clone();
    }
    let mut norm = S::zero();
    let mut cumulative = S::zero();
    for k in 0..coords.len().saturating_sub(1) {
        let mut w = m.weight(k);
        if k == space.base() {
            w += balance.clone();
        }
        cumulative += w;
        let gap = coords[k + 1].clone() - coords[k].clone();
        norm += cumulative.abs() * gap;
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::{combination_to_element, molecule, pair};
    use crate::num::Rat;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::from_ratio(n, d)
    }

    fn line(coords: &[i64]) -> FiniteMetricSpace<Rat> {
        FiniteMetricSpace::from_line_points(coords.iter().map(|&c| Rat::from_int(c)).collect(), 0)
            .unwrap()
    }

    fn worked() -> (FiniteMetricSpace<Rat>, FreeElement<Rat>) {
        let space = line(&[0, 1, 2]);
        let m = FreeElement::from_weights(&space, [(1, Rat::from_int(1)), (2, Rat::from_int(-2))])
            .unwrap();
        (space, m)
    }

    #[test]
    fn single_molecule_transport() {
        let space = line(&[0, 1, 2]);
        let plus = PointMeasure::from_weights(&space, [(1, Rat::from_int(1))]).unwrap();
        let minus = PointMeasure::from_weights(&space, [(2, Rat::from_int(1))]).unwrap();
        let sol = optimal_coupling(&space, &plus, &minus).unwrap();
        assert_eq!(sol.cost, Rat::from_int(1));
        assert_eq!(sol.coupling.weight(1, 2), Rat::from_int(1));
        let (left, right) = sol.coupling.marginals();
        assert_eq!(left, plus);
        assert_eq!(right, minus);
    }

    #[test]
    fn worked_example_norm_three() {
        let (space, m) = worked();
        let (plus, minus) = jordan_split(&space, &m);
        let sol = optimal_coupling(&space, &plus, &minus).unwrap();
        assert_eq!(sol.cost, Rat::from_int(3));
        let (left, right) = sol.coupling.marginals();
        assert_eq!(left, plus);
        assert_eq!(right, minus);

        let (norm, norming) = free_norm(&space, &m).unwrap();
        assert_eq!(norm, Rat::from_int(3));
        assert!(crate::free::lip_norm(&space, &norming).unwrap() <= Rat::from_int(1));
        assert_eq!(pair(&space, &m, &norming).unwrap(), Rat::from_int(3));
    }

    #[test]
    fn molecules_are_on_the_sphere() {
        let space = line(&[0, 2, 5, 9]);
        for x in 0..space.len() {
            for y in 0..space.len() {
                if x == y {
                    continue;
                }
                let mol = molecule(&space, x, y).unwrap();
                let (norm, norming) = free_norm(&space, &mol).unwrap();
                assert_eq!(norm, Rat::from_int(1));
                assert_eq!(pair(&space, &mol, &norming).unwrap(), Rat::from_int(1));
            }
        }
    }

    #[test]
    fn zero_element() {
        let space = line(&[0, 1, 2]);
        let (norm, norming) = free_norm(&space, &FreeElement::zero()).unwrap();
        assert_eq!(norm, Rat::from_int(0));
        assert_eq!(norming, LipschitzFunction::zero(&space));
        assert!(decompose(&space, &FreeElement::zero()).unwrap().is_empty());
        assert_eq!(
            line_norm(&space, &FreeElement::zero()).unwrap(),
            Rat::from_int(0)
        );
    }

    #[test]
    fn coupling_reweighting() {
        let space = line(&[0, 1, 2]);
        // single off-diagonal cell
        let pi = Coupling::from_pairs(&space, [((1, 2), Rat::from_int(1))]).unwrap();
        let mu = coupling_to_deleeuw(&space, &pi);
        assert_eq!(mu.weight(1, 2), space.dist(1, 2));

        // diagonal-only plans vanish
        let diag = Coupling::from_pairs(
            &space,
            [((0, 0), Rat::from_int(2)), ((2, 2), Rat::from_int(1))],
        )
        .unwrap();
        assert!(coupling_to_deleeuw(&space, &diag).is_empty());

        // the worked coupling gives back the worked measure and element
        let (space, m) = worked();
        let pi = Coupling::from_pairs(
            &space,
            [((1, 2), Rat::from_int(1)), ((0, 2), Rat::from_int(1))],
        )
        .unwrap();
        let mu = coupling_to_deleeuw(&space, &pi);
        assert_eq!(mu.weight(1, 2), Rat::from_int(1));
        assert_eq!(mu.weight(0, 2), Rat::from_int(2));
        assert_eq!(mu.mass(), Rat::from_int(3));
        assert_eq!(combination_to_element(&space, &mu).unwrap(), m);
    }

    #[test]
    fn decompose_contracts() {
        let (space, m) = worked();
        let mu = decompose(&space, &m).unwrap();
        assert_eq!(mu.mass(), Rat::from_int(3));
        assert_eq!(combination_to_element(&space, &mu).unwrap(), m);
        let left = mu.left_support();
        let right = mu.right_support();
        assert!(left.is_disjoint(&right));

        // a single molecule decomposes to its own pair
        let mol = molecule(&space, 2, 1).unwrap();
        let mu = decompose(&space, &mol).unwrap();
        assert_eq!(mu.support_pairs(), vec![(2, 1)]);
        assert_eq!(mu.mass(), Rat::from_int(1));
    }

    #[test]
    fn line_norm_oracle_values() {
        let (space, m) = worked();
        assert_eq!(line_norm(&space, &m).unwrap(), Rat::from_int(3));
        let mol = molecule(&space, 1, 2).unwrap();
        assert_eq!(line_norm(&space, &mol).unwrap(), Rat::from_int(1));
        // non-line spaces are rejected
        let dense = FiniteMetricSpace::from_matrix(space.matrix(), 0).unwrap();
        assert!(matches!(line_norm(&dense, &m), Err(Error::NotLineSpace)));
    }

    #[test]
    fn wasserstein_basics() {
        let space = line(&[0, 3, 7]);
        let a = PointMeasure::from_weights(&space, [(0, rat(1, 2)), (1, rat(1, 2))]).unwrap();
        let b = PointMeasure::from_weights(&space, [(2, Rat::from_int(1))]).unwrap();
        let dx = PointMeasure::from_weights(&space, [(1, Rat::from_int(1))]).unwrap();
        let dy = PointMeasure::from_weights(&space, [(2, Rat::from_int(1))]).unwrap();
        assert_eq!(wasserstein1(&space, &dx, &dy).unwrap(), space.dist(1, 2));
        assert_eq!(wasserstein1(&space, &a, &a).unwrap(), Rat::from_int(0));
        let ab = wasserstein1(&space, &a, &b).unwrap();
        let ba = wasserstein1(&space, &b, &a).unwrap();
        assert_eq!(ab, ba);
        // mass 1/2 travels 7 and mass 1/2 travels 4
        assert_eq!(ab, rat(11, 2));
        // unbalanced totals are rejected
        let small = PointMeasure::from_weights(&space, [(1, rat(1, 2))]).unwrap();
        assert!(matches!(
            wasserstein1(&space, &a, &small),
            Err(Error::UnbalancedTotals { .. })
        ));
    }

    /// Exhaustive oracle: minimum cost over all integer-valued transport
    /// plans, found by recursive enumeration. Valid whenever the supplies
    /// and demands are integers, since the transportation polytope then has
    /// integral vertices.
    #[allow(clippy::too_many_arguments)]
    fn brute_force_min_cost(
        space: &FiniteMetricSpace<Rat>,
        sources: &[(usize, i64)],
        sinks: &[(usize, i64)],
    ) -> Rat {
        #[allow(clippy::too_many_arguments)]
        fn recurse(
            space: &FiniteMetricSpace<Rat>,
            sources: &[(usize, i64)],
            sinks: &[(usize, i64)],
            row: usize,
            supply_left: i64,
            demand_left: &mut Vec<i64>,
            cost_so_far: Rat,
            best: &mut Option<Rat>,
        ) {
            if row == sources.len() {
                if demand_left.iter().all(|&d| d == 0)
                    && best.as_ref().is_none_or(|b| cost_so_far < *b)
                {
                    *best = Some(cost_so_far);
                }
                return;
            }
            // assign the remaining supply of this row across sinks
            #[allow(clippy::too_many_arguments)]
            fn assign(
                space: &FiniteMetricSpace<Rat>,
                sources: &[(usize, i64)],
                sinks: &[(usize, i64)],
                row: usize,
                col: usize,
                supply_left: i64,
                demand_left: &mut Vec<i64>,
                cost_so_far: Rat,
                best: &mut Option<Rat>,
            ) {
                if supply_left == 0 {
                    recurse(
                        space,
                        sources,
                        sinks,
                        row + 1,
                        sources.get(row + 1).map_or(0, |s| s.1),
                        demand_left,
                        cost_so_far,
                        best,
                    );
                    return;
                }
                if col == sinks.len() {
                    return;
                }
                let max_here = supply_left.min(demand_left[col]);
                for amount in 0..=max_here {
                    demand_left[col] -= amount;
                    let d = space.dist(sources[row].0, sinks[col].0);
                    let extra = d * Rat::from_int(amount);
                    assign(
                        space,
                        sources,
                        sinks,
                        row,
                        col + 1,
                        supply_left - amount,
                        demand_left,
                        cost_so_far.clone() + extra,
                        best,
                    );
                    demand_left[col] += amount;
                }
            }
            assign(
                space,
                sources,
                sinks,
                row,
                0,
                supply_left,
                demand_left,
                cost_so_far,
                best,
            );
        }

        let mut best = None;
        let mut demand: Vec<i64> = sinks.iter().map(|s| s.1).collect();
        recurse(
            space,
            sources,
            sinks,
            0,
            sources.first().map_or(0, |s| s.1),
            &mut demand,
            Rat::from_int(0),
            &mut best,
        );
        best.expect("feasible plan exists")
    }

    #[test]
    fn simplex_matches_exhaustive_enumeration() {
        // deterministic sweep over small integer instances on a 5-point space
        let space = FiniteMetricSpace::from_matrix(
            vec![
                vec![
                    Rat::from_int(0),
                    Rat::from_int(2),
                    Rat::from_int(3),
                    Rat::from_int(4),
                    Rat::from_int(2),
                ],
                vec![
                    Rat::from_int(2),
                    Rat::from_int(0),
                    Rat::from_int(2),
                    Rat::from_int(3),
                    Rat::from_int(4),
                ],
                vec![
                    Rat::from_int(3),
                    Rat::from_int(2),
                    Rat::from_int(0),
                    Rat::from_int(2),
                    Rat::from_int(3),
                ],
                vec![
                    Rat::from_int(4),
                    Rat::from_int(3),
                    Rat::from_int(2),
                    Rat::from_int(0),
                    Rat::from_int(2),
                ],
                vec![
                    Rat::from_int(2),
                    Rat::from_int(4),
                    Rat::from_int(3),
                    Rat::from_int(2),
                    Rat::from_int(0),
                ],
            ],
            0,
        )
        .unwrap();
        type IntSide = [(usize, i64)];
        let cases: &[(&IntSide, &IntSide)] = &[
            (&[(0, 2), (1, 1)], &[(3, 1), (4, 2)]),
            (&[(0, 1), (2, 2)], &[(1, 2), (3, 1)]),
            (&[(1, 3)], &[(0, 1), (2, 1), (4, 1)]),
            (&[(0, 2), (1, 2), (2, 2)], &[(3, 3), (4, 3)]),
            (&[(4, 1), (3, 1), (2, 1)], &[(0, 2), (1, 1)]),
        ];
        for (sources, sinks) in cases {
            let plus = PointMeasure::from_weights(
                &space,
                sources.iter().map(|&(i, w)| (i, Rat::from_int(w))),
            )
            .unwrap();
            let minus = PointMeasure::from_weights(
                &space,
                sinks.iter().map(|&(j, w)| (j, Rat::from_int(w))),
            )
            .unwrap();
            let sol = optimal_coupling(&space, &plus, &minus).unwrap();
            let expected = brute_force_min_cost(&space, sources, sinks);
            assert_eq!(sol.cost, expected);
            let (left, right) = sol.coupling.marginals();
            assert_eq!(left, plus);
            assert_eq!(right, minus);
            // dual attainment
            let m = plus.minus(&minus, &space).unwrap();
            assert_eq!(pair(&space, &m, &sol.potential).unwrap(), sol.cost);
            assert!(crate::free::lip_norm(&space, &sol.potential).unwrap() <= Rat::from_int(1));
        }
    }

    #[test]
    fn survives_heavy_degeneracy() {
        // all distances equal and all masses equal: every basis is maximally
        // degenerate and every plan between disjoint supports costs the mass
        let n = 16usize;
        let one = Rat::from_int(1);
        let dist: Vec<Vec<Rat>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            Rat::from_int(0)
                        } else {
                            one.clone()
                        }
                    })
                    .collect()
            })
            .collect();
        let space = FiniteMetricSpace::from_matrix(dist, 0).unwrap();
        let plus = PointMeasure::from_weights(&space, (1..8).map(|i| (i, one.clone()))).unwrap();
        let minus = PointMeasure::from_weights(&space, (8..15).map(|i| (i, one.clone()))).unwrap();
        let sol = optimal_coupling(&space, &plus, &minus).unwrap();
        assert_eq!(sol.cost, Rat::from_int(7));
        let (left, right) = sol.coupling.marginals();
        assert_eq!(left, plus);
        assert_eq!(right, minus);

        // tie-heavy line instance with unit masses at alternating points
        let coords: Vec<Rat> = (0..30).map(Rat::from_int).collect();
        let space = FiniteMetricSpace::from_line_points(coords, 0).unwrap();
        let m = FreeElement::from_weights(
            &space,
            (1..30).map(|i| {
                (
                    i,
                    if i % 2 == 0 {
                        -one.clone()
                    } else {
                        one.clone()
                    },
                )
            }),
        )
        .unwrap();
        let (norm, _) = free_norm(&space, &m).unwrap();
        assert_eq!(norm, line_norm(&space, &m).unwrap());
    }

    #[test]
    fn norming_function_is_tight_on_support() {
        let (space, m) = worked();
        let (norm, norming) = free_norm(&space, &m).unwrap();
        let mu = decompose(&space, &m).unwrap();
        assert_eq!(mu.mass(), norm);
        for ((x, y), _) in mu.pairs() {
            assert_eq!(
                crate::free::phi(&space, &norming, x, y).unwrap(),
                Rat::from_int(1)
            );
        }
    }
}
