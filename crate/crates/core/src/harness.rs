//! Randomized cross-validation harness.
//!
//! Deterministic under a seed: generators produce random spaces (line
//! subsets, shortest-path closures, planar point sets) and random elements,
//! and the checks re-derive every cross-module invariant, pitting each
//! solver against its independent oracle.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::extension::ExtensionProblem;
use crate::free::{
    combination_to_element, jordan_split, lip_norm, pair, phi, FreeElement, PointMeasure,
};
use crate::metric::FiniteMetricSpace;
use crate::monotonicity::{
    check_monotone_bruteforce, check_monotone_lp, cycle_inequality_sides,
    is_optimal_representation, DEFAULT_BRUTEFORCE_CAP,
};
use crate::num::{within_tol, Scalar};
use crate::transport::{decompose, free_norm, line_norm, optimal_coupling, wasserstein1};

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Random strictly increasing integer coordinates; base at a random index.
pub fn gen_line_space<S: Scalar>(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteMetricSpace<S> {
    let n = rng.gen_range(2..=max_points.max(2));
    let mut coords: Vec<i64> = Vec::with_capacity(n);
    let mut t: i64 = rng.gen_range(-20..=0);
    for _ in 0..n {
        coords.push(t);
        t += rng.gen_range(1..=7);
    }
    let base = rng.gen_range(0..n);
    FiniteMetricSpace::from_line_points(coords.into_iter().map(S::from_int).collect(), base)
        .expect("increasing coordinates")
}

/// Shortest-path closure of a random positive integer matrix: a generic
/// finite metric space with exact entries.
#[allow(clippy::needless_range_loop)]
pub fn gen_closure_space<S: Scalar>(
    rng: &mut ChaCha8Rng,
    max_points: usize,
) -> FiniteMetricSpace<S> {
    let n = rng.gen_range(2..=max_points.max(2));
    let mut w = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = rng.gen_range(1..=9);
            w[i][j] = v;
            w[j][i] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let via = w[i][k] + w[k][j];
                    if via < w[i][j] {
                        w[i][j] = via;
                    }
                }
            }
        }
    }
    let dist = w
        .into_iter()
        .map(|row| row.into_iter().map(S::from_int).collect())
        .collect();
    let base = rng.gen_range(0..n);
    FiniteMetricSpace::from_matrix(dist, base).expect("metric closure")
}

/// Random distinct integer points in the plane with the taxicab metric
/// (exact in both backends).
pub fn gen_taxicab_space<S: Scalar>(
    rng: &mut ChaCha8Rng,
    max_points: usize,
) -> FiniteMetricSpace<S> {
    let n = rng.gen_range(2..=max_points.max(2));
    let mut pts: Vec<(i64, i64)> = Vec::new();
    while pts.len() < n {
        let p = (rng.gen_range(0..=60), rng.gen_range(0..=60));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let dist = pts
        .iter()
        .map(|&(x1, y1)| {
            pts.iter()
                .map(|&(x2, y2)| S::from_int((x1 - x2).abs() + (y1 - y2).abs()))
                .collect()
        })
        .collect();
    let base = rng.gen_range(0..n);
    FiniteMetricSpace::from_matrix(dist, base).expect("taxicab metric")
}

/// Random distinct integer points in the plane with the Euclidean metric
/// (float backend only).
pub fn gen_euclidean_space(rng: &mut ChaCha8Rng, max_points: usize) -> FiniteMetricSpace<f64> {
    let n = rng.gen_range(2..=max_points.max(2));
    let mut pts: Vec<(i64, i64)> = Vec::new();
    while pts.len() < n {
        let p = (rng.gen_range(0..=60), rng.gen_range(0..=60));
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    let dist = pts
        .iter()
        .map(|&(x1, y1)| {
            pts.iter()
                .map(|&(x2, y2)| (((x1 - x2).pow(2) + (y1 - y2).pow(2)) as f64).sqrt())
                .collect()
        })
        .collect();
    let base = rng.gen_range(0..n);
    FiniteMetricSpace::from_matrix(dist, base).expect("euclidean metric")
}

/// Dyadic weights keep all flow arithmetic exact, including in floats.
pub fn gen_element<S: Scalar>(
    rng: &mut ChaCha8Rng,
    space: &FiniteMetricSpace<S>,
    max_support: usize,
) -> FreeElement<S> {
    let n = space.len();
    let support = rng.gen_range(1..=max_support.min(n.saturating_sub(1)).max(1));
    let mut weights = Vec::new();
    for _ in 0..support {
        let i = rng.gen_range(0..n);
        if i == space.base() {
            continue;
        }
        let num = loop {
            let k: i64 = rng.gen_range(-64..=64);
            if k != 0 {
                break k;
            }
        };
        weights.push((i, S::from_ratio(num, 16)));
    }
    FreeElement::from_weights(space, weights).expect("valid weights")
}

/// Distribute `total` sixteenths of mass over a random subset of at most
/// `max_support` points; measures built with equal `total` have equal mass.
pub fn gen_positive_measure<S: Scalar>(
    rng: &mut ChaCha8Rng,
    space: &FiniteMetricSpace<S>,
    max_support: usize,
    total: i64,
) -> PointMeasure<S> {
    let n = space.len();
    let support_size = rng.gen_range(1..=max_support.min(n).max(1));
    let mut subset: Vec<usize> = (0..n).collect();
    for i in (1..subset.len()).rev() {
        let j = rng.gen_range(0..=i);
        subset.swap(i, j);
    }
    subset.truncate(support_size);
    let mut weights = vec![S::zero(); n];
    for _ in 0..total.max(1) {
        let idx = subset[rng.gen_range(0..support_size)];
        weights[idx] += S::from_ratio(1, 16);
    }
    PointMeasure::from_weights(
        space,
        weights
            .into_iter()
            .enumerate()
            .filter(|(_, w)| !w.is_zero()),
    )
    .expect("nonnegative weights")
}

pub fn gen_pair_set<S: Scalar>(
    rng: &mut ChaCha8Rng,
    space: &FiniteMetricSpace<S>,
    max_pairs: usize,
) -> Vec<(usize, usize)> {
    let n = space.len();
    let count = rng.gen_range(1..=max_pairs.max(1));
    let mut pairs = Vec::new();
    for _ in 0..count {
        let x = rng.gen_range(0..n);
        let y = rng.gen_range(0..n);
        if x != y {
            pairs.push((x, y));
        }
    }
    if pairs.is_empty() {
        let x = rng.gen_range(1..n);
        pairs.push(if rng.gen_bool(0.5) {
            (x, x - 1)
        } else {
            (x - 1, x)
        });
    }
    pairs
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub cases: usize,
    pub exact: bool,
    pub checks_run: usize,
    pub failures: Vec<String>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

macro_rules! check {
    ($report:expr, $case:expr, $name:expr, $cond:expr, $detail:expr) => {
        $report.checks_run += 1;
        let passed: bool = $cond;
        if !passed {
            $report
                .failures
                .push(format!("case {}: {}: {}", $case, $name, $detail));
        }
    };
}

/// Run the full invariant sweep over `cases` random instances.
pub fn selftest<S: Scalar>(seed: u64, cases: usize) -> SelftestReport {
    let mut report = SelftestReport {
        seed,
        cases,
        exact: S::EXACT,
        checks_run: 0,
        failures: Vec::new(),
    };
    for case in 0..cases {
        let mut rng = rng_for(seed, case as u64);
        if let Err(e) = run_case::<S>(&mut rng, case, &mut report) {
            report.failures.push(format!("case {case}: error: {e}"));
        }
    }
    report
}

fn run_case<S: Scalar>(
    rng: &mut ChaCha8Rng,
    case: usize,
    report: &mut SelftestReport,
) -> Result<()> {
    let tol = S::default_tol();

    // --- line oracle: free_norm vs line_norm ---
    let space = gen_line_space::<S>(rng, 12);
    let m = gen_element(rng, &space, 5);
    let (norm, norming) = free_norm(&space, &m)?;
    let oracle = line_norm(&space, &m)?;
    check!(
        report,
        case,
        "line norm oracle",
        within_tol(&norm, &oracle, &tol, &oracle),
        format!("solver {norm} vs oracle {oracle}")
    );
    check!(
        report,
        case,
        "norming attains",
        within_tol(&pair(&space, &m, &norming)?, &norm, &tol, &norm),
        "pairing does not attain the norm"
    );
    check!(
        report,
        case,
        "norming in unit ball",
        lip_norm(&space, &norming)? <= S::one() + tol.clone(),
        "norming function exceeds the unit ball"
    );

    // --- decomposition contracts on a closure space ---
    let space = gen_closure_space::<S>(rng, 6);
    let m = gen_element(rng, &space, 4);
    let (norm, _) = free_norm(&space, &m)?;
    let mu = decompose(&space, &m)?;
    check!(
        report,
        case,
        "decompose mass",
        within_tol(&mu.mass(), &norm, &tol, &norm),
        format!("mass {} vs norm {norm}", mu.mass())
    );
    let rebuilt = combination_to_element(&space, &mu)?;
    check!(
        report,
        case,
        "decompose represents",
        if S::EXACT {
            rebuilt == m
        } else {
            rebuilt
                .support()
                .iter()
                .chain(m.support().iter())
                .all(|&i| within_tol(&rebuilt.weight(i), &m.weight(i), &tol, &S::one()))
        },
        "reweighted pairs do not rebuild the element"
    );
    check!(
        report,
        case,
        "disjoint supports",
        mu.left_support().is_disjoint(&mu.right_support()),
        "left and right supports overlap"
    );
    let (optimal, cert) = is_optimal_representation(&space, &mu)?;
    check!(
        report,
        case,
        "decompose monotone",
        optimal,
        "support not monotone"
    );
    if let Some(w) = &cert.witness {
        for (x, y) in mu.support_pairs() {
            check!(
                report,
                case,
                "witness tight on support",
                within_tol(&phi(&space, w, x, y)?, &S::one(), &tol, &S::one()),
                format!("quotient at ({x},{y}) not 1")
            );
        }
    }

    // --- restriction optimality on a random subset ---
    let pairs = mu.support_pairs();
    if !pairs.is_empty() {
        let keep: std::collections::BTreeSet<(usize, usize)> = pairs
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.6))
            .collect();
        let restricted = mu.restrict(&keep);
        if !restricted.is_empty() {
            let sub_m = combination_to_element(&space, &restricted)?;
            let (sub_norm, _) = free_norm(&space, &sub_m)?;
            check!(
                report,
                case,
                "restriction optimal",
                within_tol(&restricted.mass(), &sub_norm, &tol, &sub_norm),
                format!("restricted mass {} vs norm {sub_norm}", restricted.mass())
            );
        }
    }

    // --- monotonicity LP vs brute force ---
    let space = gen_closure_space::<S>(rng, 5);
    let pairs = gen_pair_set(rng, &space, 5);
    let lp = check_monotone_lp(&space, &pairs)?;
    let bf = check_monotone_bruteforce(&space, &pairs, DEFAULT_BRUTEFORCE_CAP)?;
    check!(
        report,
        case,
        "lp agrees with brute force",
        lp.monotone == bf.monotone,
        format!("lp {} vs bf {}", lp.monotone, bf.monotone)
    );
    for cert in [&lp, &bf] {
        if let Some(w) = &cert.witness {
            check!(
                report,
                case,
                "monotone witness ball",
                lip_norm(&space, w)? <= S::one() + tol.clone(),
                "witness outside ball"
            );
        }
        if let Some(cycle) = &cert.violating_cycle {
            let (lhs, rhs) = cycle_inequality_sides(&space, cycle);
            check!(
                report,
                case,
                "cycle violates",
                lhs > rhs,
                format!("cycle sides {lhs} <= {rhs}")
            );
        }
    }

    // --- extension equivalences ---
    let space = gen_taxicab_space::<S>(rng, 8);
    let n = space.len();
    let a_size = rng.gen_range(1..=n.min(4));
    let anchors: Vec<usize> = {
        let mut v: Vec<usize> = (0..n).collect();
        for i in (1..v.len()).rev() {
            v.swap(i, rng.gen_range(0..=i));
        }
        v.truncate(a_size);
        v
    };
    // inf-convolution of random integer values is 1-Lipschitz on the anchors
    let raw: Vec<(usize, S)> = anchors
        .iter()
        .map(|&i| (i, S::from_int(rng.gen_range(-30..=30))))
        .collect();
    let smoothed: Vec<(usize, S)> = anchors
        .iter()
        .map(|&p| {
            let v = raw
                .iter()
                .map(|(q, vq)| vq.clone() + space.dist(p, *q))
                .fold(None::<S>, |acc, c| match acc {
                    None => Some(c),
                    Some(a) => Some(if c < a { c } else { a }),
                })
                .expect("nonempty anchors");
            (p, v)
        })
        .collect();
    let problem = ExtensionProblem::new(&space, smoothed.into_iter().collect())?;
    let forced = problem.forced_set(&space)?;
    let lower = problem.mcshane_lower_all(&space)?;
    let upper = problem.mcshane_upper_all(&space)?;
    for x in 0..n {
        let env_equal = within_tol(lower.value(x), upper.value(x), &tol, upper.value(x));
        check!(
            report,
            case,
            "forced set matches envelopes",
            env_equal == forced.contains(x),
            format!(
                "point {x}: envelopes {} vs forced {}",
                env_equal,
                forced.contains(x)
            )
        );
    }
    for (x, y) in problem.forced_pairs(&space)? {
        check!(
            report,
            case,
            "forced pair coordinates",
            forced.contains(x) && forced.contains(y),
            format!("pair ({x},{y}) outside the forced set")
        );
    }

    // --- transport duality on a planar taxicab instance ---
    let space = gen_taxicab_space::<S>(rng, 8);
    let m = gen_element(rng, &space, 4);
    let (plus, minus) = jordan_split(&space, &m);
    if !plus.is_zero() {
        let sol = optimal_coupling(&space, &plus, &minus)?;
        let (left, right) = sol.coupling.marginals();
        check!(
            report,
            case,
            "marginal left",
            left == plus,
            "left marginal off"
        );
        check!(
            report,
            case,
            "marginal right",
            right == minus,
            "right marginal off"
        );
        let attained = pair(&space, &m, &sol.potential)?;
        check!(
            report,
            case,
            "zero duality gap",
            within_tol(&attained, &sol.cost, &tol, &sol.cost),
            format!("dual {attained} vs primal {}", sol.cost)
        );
    }

    // --- wasserstein triangle inequality ---
    let a = gen_positive_measure(rng, &space, 3, 8);
    let b = gen_positive_measure(rng, &space, 3, 8);
    let c = gen_positive_measure(rng, &space, 3, 8);
    let (ta, tb, tc) = (a.total(), b.total(), c.total());
    if ta == tb && tb == tc && !a.is_zero() {
        let ab = wasserstein1(&space, &a, &b)?;
        let bc = wasserstein1(&space, &b, &c)?;
        let ac = wasserstein1(&space, &a, &c)?;
        let slack = tol.clone() * (S::one() + ac.clone());
        check!(
            report,
            case,
            "wasserstein triangle",
            ac <= ab.clone() + bc.clone() + slack,
            format!("{ac} > {ab} + {bc}")
        );
    }

    // --- snowflakes are concave; all their molecules extreme ---
    let line = gen_line_space::<S>(rng, 5);
    if let Ok(snow) = line.snowflake(1, 2) {
        check!(
            report,
            case,
            "snowflake concave",
            snow.is_concave(),
            "not concave"
        );
        for x in 0..snow.len() {
            for y in 0..snow.len() {
                if x != y {
                    check!(
                        report,
                        case,
                        "snowflake molecules extreme",
                        crate::extremal::is_extreme_molecule(&snow, x, y)?,
                        format!("molecule ({x},{y}) not extreme")
                    );
                }
            }
        }
    }

    Ok(())
}
