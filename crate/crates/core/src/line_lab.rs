//! Real-line constructions at finite resolution: the L1 isometry on step
//! densities, the dyadic series for the element induced by Lebesgue measure
//! on [0, 1], the Smith-Volterra-Cantor staircase, and the snowflake margin
//! demonstration.

use crate::error::{Error, Result};
use crate::free::{DeLeeuwMeasure, FreeElement, LipschitzFunction, PointMeasure};
use crate::metric::FiniteMetricSpace;
use crate::num::Scalar;
use crate::transport;

pub const LEBESGUE_DEPTH_CAP: u32 = 20;
pub const SVC_DEPTH_CAP: u32 = 12;

/// Piecewise constant density on consecutive intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDensity<S> {
    breakpoints: Vec<S>,
    values: Vec<S>,
}

impl<S: Scalar> StepDensity<S> {
    pub fn new(breakpoints: Vec<S>, values: Vec<S>) -> Result<Self> {
        if breakpoints.is_empty() {
            if values.is_empty() {
                return Ok(StepDensity {
                    breakpoints,
                    values,
                });
            }
            return Err(Error::Parse("values without breakpoints".into()));
        }
        if values.len() + 1 != breakpoints.len() {
            return Err(Error::Parse(format!(
                "{} interval values need {} breakpoints, got {}",
                values.len(),
                values.len() + 1,
                breakpoints.len()
            )));
        }
        for i in 1..breakpoints.len() {
            if breakpoints[i] <= breakpoints[i - 1] {
                return Err(Error::UnsortedCoordinates { index: i });
            }
        }
        Ok(StepDensity {
            breakpoints,
            values,
        })
    }

    /// The normalized indicator `1_(min,max) / (x - y)` with `x != y`.
    pub fn indicator_quotient(x: S, y: S) -> Result<Self> {
        if x == y {
            return Err(Error::Parse("degenerate indicator interval".into()));
        }
        let (lo, hi) = if x < y {
            (x.clone(), y.clone())
        } else {
            (y.clone(), x.clone())
        };
        let value = S::one() / (x - y);
        StepDensity::new(vec![lo, hi], vec![value])
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn l1_norm(&self) -> S {
        let mut acc = S::zero();
        for (i, v) in self.values.iter().enumerate() {
            let gap = self.breakpoints[i + 1].clone() - self.breakpoints[i].clone();
            acc += v.abs() * gap;
        }
        acc
    }
}

/// Translate a step density into a weighted pair measure over the grid of
/// its breakpoints (plus the origin): one pair per maximal constant piece,
/// positive pieces pointing down-line, negative pieces up-line. The measure
/// represents the same functional and carries mass equal to the L1 norm.
pub fn step_decompose<S: Scalar>(
    density: &StepDensity<S>,
) -> Result<(FiniteMetricSpace<S>, DeLeeuwMeasure<S>)> {
    let mut grid: Vec<S> = density.breakpoints.to_vec();
    if !grid.iter().any(|t| t.is_zero()) {
        grid.push(S::zero());
        grid.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    }
    let base = grid
        .iter()
        .position(|t| t.is_zero())
        .expect("origin was inserted");
    let space = FiniteMetricSpace::from_line_points(grid.clone(), base)?;

    let index_of = |t: &S| -> usize {
        grid.iter()
            .position(|g| g == t)
            .expect("breakpoint is on the grid")
    };

    let mut mu = DeLeeuwMeasure::empty();
    let k = density.values.len();
    let mut piece_start = 0usize;
    while piece_start < k {
        let v = density.values[piece_start].clone();
        let mut piece_end = piece_start + 1;
        while piece_end < k && density.values[piece_end] == v {
            piece_end += 1;
        }
        if !v.is_zero() {
            let a = &density.breakpoints[piece_start];
            let b = &density.breakpoints[piece_end];
            let length = b.clone() - a.clone();
            let weight = v.abs() * length;
            let (ia, ib) = (index_of(a), index_of(b));
            if v > S::zero() {
                mu.insert_mass((ib, ia), weight);
            } else {
                mu.insert_mass((ia, ib), weight);
            }
        }
        piece_start = piece_end;
    }
    Ok((space, mu))
}

/// Dyadic partial sums for the element induced by Lebesgue measure on
/// [0, 1]. The full series has mass 1/2; the depth-N partial sum carries
/// `(1/2)(1 - 2^-(N+1))` and leaves an L1 residual of `2^-(N+2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LebesgueReport<S: Scalar> {
    pub depth: u32,
    pub space: FiniteMetricSpace<S>,
    pub partial: DeLeeuwMeasure<S>,
    pub partial_mass: S,
    pub residual_norm: S,
}

pub fn lebesgue_series<S: Scalar>(depth: u32) -> Result<LebesgueReport<S>> {
    if depth > LEBESGUE_DEPTH_CAP {
        return Err(Error::DepthCapExceeded {
            depth,
            cap: LEBESGUE_DEPTH_CAP,
        });
    }
    let cells = 1u64 << (depth + 1);
    let grid: Vec<S> = (0..=cells)
        .map(|j| S::from_ratio(j as i64, cells as i64))
        .collect();
    let space = FiniteMetricSpace::from_line_points(grid, 0)?;

    let mut partial = DeLeeuwMeasure::empty();
    for n in 0..=depth {
        let weight = S::from_ratio(1, 1i64 << (2 * (n + 1)));
        let stride = 1u64 << (depth - n);
        for k in 0..(1u64 << n) {
            let x_idx = ((2 * k + 1) * stride) as usize;
            let y_idx = (2 * k * stride) as usize;
            partial.insert_mass((x_idx, y_idx), weight.clone());
        }
    }
    let partial_mass = partial.mass();

    // Exact L1 distance between the density 1 - t and the partial-sum step
    // density, integrated cell by cell (the integrand is linear per cell).
    let h = S::from_ratio(1, cells as i64);
    let mut residual = S::zero();
    for j in 0..cells {
        let mut step_value = S::zero();
        for n in 0..=depth {
            if (j >> (depth - n)).is_multiple_of(2) {
                step_value += S::from_ratio(1, 1i64 << (n + 1));
            }
        }
        let t_left = S::from_ratio(j as i64, cells as i64);
        let r_left = S::one() - t_left - step_value;
        let r_right = r_left.clone() - h.clone();
        let zero = S::zero();
        let same_sign = (r_left >= zero && r_right >= zero) || (r_left <= zero && r_right <= zero);
        if same_sign {
            let avg = (r_left + r_right).abs() / S::from_int(2);
            residual += avg * h.clone();
        } else {
            // slope is exactly -1: two triangles on either side of the zero
            let two = S::from_int(2);
            residual += (r_left.clone() * r_left + r_right.clone() * r_right) / two;
        }
    }

    Ok(LebesgueReport {
        depth,
        space,
        partial,
        partial_mass,
        residual_norm: residual,
    })
}

/// Smith-Volterra-Cantor construction at finite depth: stage k removes a
/// centered open interval of length `4^-k` from each surviving interval.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorApprox<S> {
    pub depth: u32,
    /// Removed open intervals, sorted by left endpoint.
    pub removed: Vec<(S, S)>,
    /// Surviving closed intervals, sorted.
    pub survivors: Vec<(S, S)>,
    /// Remaining measure `1 - sum of removed lengths`.
    pub alpha: S,
}

impl<S: Scalar> CantorApprox<S> {
    /// Staircase value `h(t)`: measure of `[0, t]` inside the survivors.
    pub fn staircase_value(&self, t: &S) -> S {
        let mut acc = S::zero();
        for (a, b) in &self.survivors {
            if *t <= *a {
                break;
            }
            let hi = if *t < *b { t.clone() } else { b.clone() };
            acc += hi - a.clone();
        }
        acc
    }

    /// Derivative of the staircase: indicator density of the survivors.
    pub fn density(&self) -> Result<StepDensity<S>> {
        let mut breakpoints = vec![S::zero()];
        let mut values = Vec::new();
        for (a, b) in &self.survivors {
            if *a != *breakpoints.last().expect("nonempty") {
                values.push(S::zero());
                breakpoints.push(a.clone());
            }
            values.push(S::one());
            breakpoints.push(b.clone());
        }
        StepDensity::new(breakpoints, values)
    }
}

pub fn svc_build<S: Scalar>(depth: u32) -> Result<CantorApprox<S>> {
    if depth > SVC_DEPTH_CAP {
        return Err(Error::DepthCapExceeded {
            depth,
            cap: SVC_DEPTH_CAP,
        });
    }
    let mut survivors: Vec<(S, S)> = vec![(S::zero(), S::one())];
    let mut removed: Vec<(S, S)> = Vec::new();
    let two = S::from_int(2);
    for k in 1..=depth {
        let gap = S::from_ratio(1, 1i64 << (2 * k));
        let half_gap = gap / two.clone();
        let mut next = Vec::with_capacity(survivors.len() * 2);
        for (a, b) in survivors {
            let center = (a.clone() + b.clone()) / two.clone();
            let lo = center.clone() - half_gap.clone();
            let hi = center + half_gap.clone();
            removed.push((lo.clone(), hi.clone()));
            next.push((a, lo));
            next.push((hi, b));
        }
        survivors = next;
    }
    removed.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite endpoints"));
    let mut alpha = S::one();
    for (a, b) in &removed {
        alpha -= b.clone() - a.clone();
    }
    Ok(CantorApprox {
        depth,
        removed,
        survivors,
        alpha,
    })
}

/// The depth-n truncation of the fat-Cantor element together with its
/// staircase norming function: `m = delta(1) + sum_k (delta(a_k) - delta(b_k))`
/// over the removed intervals `(a_k, b_k)`, and `H(x) = h_n(x)`. At every
/// finite depth, `<m, H> = free_norm(m) = alpha_n`.
pub fn svc_element<S: Scalar>(
    approx: &CantorApprox<S>,
) -> Result<(FiniteMetricSpace<S>, FreeElement<S>, LipschitzFunction<S>)> {
    let mut coords = vec![S::zero(), S::one()];
    for (a, b) in &approx.removed {
        coords.push(a.clone());
        coords.push(b.clone());
    }
    coords.sort_by(|x, y| x.partial_cmp(y).expect("finite endpoints"));
    coords.dedup();
    let space = FiniteMetricSpace::from_line_points(coords.clone(), 0)?;
    let index_of = |t: &S| -> usize {
        coords
            .binary_search_by(|c| c.partial_cmp(t).expect("finite endpoints"))
            .expect("endpoint on grid")
    };

    let mut weights: Vec<(usize, S)> = vec![(index_of(&S::one()), S::one())];
    for (a, b) in &approx.removed {
        weights.push((index_of(a), S::one()));
        weights.push((index_of(b), -S::one()));
    }
    let element = FreeElement::from_weights(&space, weights)?;

    // one sweep over the sorted coordinates and survivor intervals
    let mut values = Vec::with_capacity(coords.len());
    let mut survivors = approx.survivors.iter().peekable();
    let mut measure_before = S::zero();
    for t in &coords {
        while let Some((a, b)) = survivors.peek() {
            if *b <= *t {
                measure_before += b.clone() - a.clone();
                survivors.next();
            } else {
                break;
            }
        }
        let mut h = measure_before.clone();
        if let Some((a, b)) = survivors.peek() {
            if *a < *t && *t < *b {
                h += t.clone() - a.clone();
            }
        }
        values.push(h);
    }
    let staircase = LipschitzFunction::new(values);
    Ok((space, element, staircase))
}

/// Snowflake margin report on the grid `{0, 1/n, ..., 1}` with metric
/// `|x - y|^theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnowflakeDemoReport<S: Scalar> {
    pub grid: usize,
    pub theta: (u32, u32),
    /// Minimum of `1 - phi(omega)(p, q)` over pairs `p > q > 0`; strictly
    /// positive by strict concavity of `t^theta`.
    pub min_margin: S,
    pub argmin_pair: (usize, usize),
    /// Norm of the discretized uniform measure, via the solver.
    pub uniform_norm: S,
    /// `<uniform, omega>`: must agree with the norm since omega norms every
    /// positive element.
    pub omega_pairing: S,
    /// Pairs of the decomposition of the uniform element all end at base.
    pub pairs_end_at_base: bool,
}

pub fn snowflake_demo<S: Scalar>(n: usize, theta: (u32, u32)) -> Result<SnowflakeDemoReport<S>> {
    if n < 2 {
        return Err(Error::GridTooSmall { n });
    }
    let coords: Vec<S> = (0..=n).map(|i| S::from_ratio(i as i64, n as i64)).collect();
    let line = FiniteMetricSpace::from_line_points(coords, 0)?;
    let snow = line.snowflake(theta.0, theta.1)?;
    let omega = LipschitzFunction::dist_to_base(&snow);

    let mut min_margin: Option<(S, (usize, usize))> = None;
    for p in 1..=n {
        for q in 1..p {
            let quotient = crate::free::phi(&snow, &omega, p, q)?;
            let margin = S::one() - quotient;
            if min_margin.as_ref().is_none_or(|(best, _)| margin < *best) {
                min_margin = Some((margin, (p, q)));
            }
        }
    }
    let (min_margin, argmin_pair) = min_margin.ok_or(Error::GridTooSmall { n })?;

    let uniform =
        FreeElement::from_weights(&snow, (1..=n).map(|i| (i, S::from_ratio(1, n as i64))))?;
    let (uniform_norm, _) = transport::free_norm(&snow, &uniform)?;
    let omega_pairing = crate::free::pair(&snow, &uniform, &omega)?;
    let mu = transport::decompose(&snow, &uniform)?;
    let pairs_end_at_base = mu.pairs().all(|((_, y), _)| y == snow.base());

    // cross-check against the positive-functional formula |m| = <m, d(.,0)>
    let _ = PointMeasure::from_weights(&snow, (1..=n).map(|i| (i, S::from_ratio(1, n as i64))))?;

    Ok(SnowflakeDemoReport {
        grid: n,
        theta,
        min_margin,
        argmin_pair,
        uniform_norm,
        omega_pairing,
        pairs_end_at_base,
    })
}
