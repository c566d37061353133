//! Finitely supported functionals, Lipschitz functions, molecules, and
//! discrete de Leeuw measures on ordered pairs.
//!
//! The pairing `<m, f> = sum_i w_i f(i)` evaluates a free element against a
//! function vanishing at the base point; `phi` is the incremental-quotient
//! transform `(f(x) - f(y)) / d(x, y)` that molecules represent.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::num::Scalar;

/// Finitely supported functional `sum_i w_i delta(x_i)`.
///
/// The base point never carries a weight: `delta(base) = 0`, so base entries
/// are absorbed on construction. Zero weights are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FreeElement<S> {
    weights: BTreeMap<usize, S>,
}

impl<S: Scalar> FreeElement<S> {
    pub fn zero() -> Self {
        FreeElement {
            weights: BTreeMap::new(),
        }
    }

    /// Collect weights, dropping base entries and zeros, merging duplicates.
    pub fn from_weights<I>(space: &FiniteMetricSpace<S>, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, S)>,
    {
        let mut map: BTreeMap<usize, S> = BTreeMap::new();
        for (i, w) in weights {
            space.check_index(i)?;
            if i == space.base() {
                continue;
            }
            let entry = map.entry(i).or_insert_with(S::zero);
            *entry += w;
        }
        map.retain(|_, w| !w.is_zero());
        Ok(FreeElement { weights: map })
    }

    pub fn delta(space: &FiniteMetricSpace<S>, x: usize) -> Result<Self> {
        Self::from_weights(space, [(x, S::one())])
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, i: usize) -> S {
        self.weights.get(&i).cloned().unwrap_or_else(S::zero)
    }

    pub fn weights(&self) -> impl Iterator<Item = (usize, &S)> + '_ {
        self.weights.iter().map(|(&i, w)| (i, w))
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.weights.keys().copied().collect()
    }

    pub fn total(&self) -> S {
        self.weights
            .values()
            .fold(S::zero(), |acc, w| acc + w.clone())
    }

    pub fn scaled(&self, c: &S) -> Self {
        let mut weights: BTreeMap<usize, S> = BTreeMap::new();
        for (&i, w) in &self.weights {
            let v = c.clone() * w.clone();
            if !v.is_zero() {
                weights.insert(i, v);
            }
        }
        FreeElement { weights }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut weights = self.weights.clone();
        for (&i, w) in &other.weights {
            let entry = weights.entry(i).or_insert_with(S::zero);
            *entry += w.clone();
        }
        weights.retain(|_, w| !w.is_zero());
        FreeElement { weights }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(&-S::one()))
    }
}

/// Nonnegative weights on points; the base point may carry mass.
/// Used for the two halves of a Jordan decomposition and for transport
/// marginals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointMeasure<S> {
    weights: BTreeMap<usize, S>,
}

impl<S: Scalar> PointMeasure<S> {
    pub fn zero() -> Self {
        PointMeasure {
            weights: BTreeMap::new(),
        }
    }

    pub fn from_weights<I>(space: &FiniteMetricSpace<S>, weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, S)>,
    {
        let mut map: BTreeMap<usize, S> = BTreeMap::new();
        for (i, w) in weights {
            space.check_index(i)?;
            if w < S::zero() {
                return Err(Error::NonpositiveWeight {
                    detail: format!("weight {w} at point {i}"),
                });
            }
            if w.is_zero() {
                continue;
            }
            let entry = map.entry(i).or_insert_with(S::zero);
            *entry += w;
        }
        Ok(PointMeasure { weights: map })
    }

    pub fn weight(&self, i: usize) -> S {
        self.weights.get(&i).cloned().unwrap_or_else(S::zero)
    }

    pub fn weights(&self) -> impl Iterator<Item = (usize, &S)> + '_ {
        self.weights.iter().map(|(&i, w)| (i, w))
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.weights.keys().copied().collect()
    }

    pub fn total(&self) -> S {
        self.weights
            .values()
            .fold(S::zero(), |acc, w| acc + w.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn insert_mass(&mut self, i: usize, w: S) {
        if !w.is_zero() {
            let entry = self.weights.entry(i).or_insert_with(S::zero);
            *entry += w;
        }
    }

    /// Signed difference as a free element (base entries absorbed).
    pub fn minus(&self, other: &Self, space: &FiniteMetricSpace<S>) -> Result<FreeElement<S>> {
        let pos = self.weights.iter().map(|(&i, w)| (i, w.clone()));
        let neg = other.weights.iter().map(|(&i, w)| (i, -w.clone()));
        FreeElement::from_weights(space, pos.chain(neg))
    }
}

/// Real values per point. Values are general Lipschitz data; the pairing
/// against free elements additionally requires value 0 at the base point.
#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzFunction<S> {
    values: Vec<S>,
}

impl<S: Scalar> LipschitzFunction<S> {
    pub fn new(values: Vec<S>) -> Self {
        LipschitzFunction { values }
    }

    pub fn zero(space: &FiniteMetricSpace<S>) -> Self {
        LipschitzFunction {
            values: vec![S::zero(); space.len()],
        }
    }

    /// The largest function in the unit ball vanishing at base: `d(., base)`.
    pub fn dist_to_base(space: &FiniteMetricSpace<S>) -> Self {
        let values = (0..space.len())
            .map(|i| space.dist(i, space.base()))
            .collect();
        LipschitzFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> &S {
        &self.values[i]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn check_space(&self, space: &FiniteMetricSpace<S>) -> Result<()> {
        if self.values.len() == space.len() {
            Ok(())
        } else {
            Err(Error::SpaceMismatch {
                expected: space.len(),
                found: self.values.len(),
            })
        }
    }

    /// Shift so the base point value becomes zero.
    pub fn rebased(&self, space: &FiniteMetricSpace<S>) -> Result<Self> {
        self.check_space(space)?;
        let shift = self.values[space.base()].clone();
        Ok(LipschitzFunction {
            values: self
                .values
                .iter()
                .map(|v| v.clone() - shift.clone())
                .collect(),
        })
    }
}

/// Positive weights on ordered off-diagonal pairs `(x, y)`; a discrete
/// de Leeuw representation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeLeeuwMeasure<S> {
    weights: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> DeLeeuwMeasure<S> {
    pub fn empty() -> Self {
        DeLeeuwMeasure {
            weights: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I>(space: &FiniteMetricSpace<S>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), S)>,
    {
        let mut map: BTreeMap<(usize, usize), S> = BTreeMap::new();
        for ((x, y), w) in pairs {
            space.check_index(x)?;
            space.check_index(y)?;
            if x == y {
                return Err(Error::DiagonalPair { index: x });
            }
            if w < S::zero() {
                return Err(Error::NonpositiveWeight {
                    detail: format!("weight {w} at pair ({x}, {y})"),
                });
            }
            if w.is_zero() {
                continue;
            }
            let entry = map.entry((x, y)).or_insert_with(S::zero);
            *entry += w;
        }
        Ok(DeLeeuwMeasure { weights: map })
    }

    /// Total mass `sum of weights`; the norm of the measure.
    pub fn mass(&self) -> S {
        self.weights
            .values()
            .fold(S::zero(), |acc, w| acc + w.clone())
    }

    pub fn weight(&self, x: usize, y: usize) -> S {
        self.weights.get(&(x, y)).cloned().unwrap_or_else(S::zero)
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &S)> + '_ {
        self.weights.iter().map(|(&p, w)| (p, w))
    }

    pub fn support_pairs(&self) -> Vec<(usize, usize)> {
        self.weights.keys().copied().collect()
    }

    pub fn left_support(&self) -> BTreeSet<usize> {
        self.weights.keys().map(|&(x, _)| x).collect()
    }

    pub fn right_support(&self) -> BTreeSet<usize> {
        self.weights.keys().map(|&(_, y)| y).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn scaled(&self, c: &S) -> Self {
        let weights = self
            .weights
            .iter()
            .filter_map(|(&p, w)| {
                let v = c.clone() * w.clone();
                (!v.is_zero()).then_some((p, v))
            })
            .collect();
        DeLeeuwMeasure { weights }
    }

    /// Restriction to a subset of pairs.
    pub fn restrict(&self, keep: &BTreeSet<(usize, usize)>) -> Self {
        let weights = self
            .weights
            .iter()
            .filter(|(p, _)| keep.contains(p))
            .map(|(&p, w)| (p, w.clone()))
            .collect();
        DeLeeuwMeasure { weights }
    }

    pub(crate) fn insert_mass(&mut self, pair: (usize, usize), w: S) {
        if !w.is_zero() {
            let entry = self.weights.entry(pair).or_insert_with(S::zero);
            *entry += w;
        }
    }

    pub(crate) fn remove_mass(&mut self, pair: (usize, usize), w: &S) {
        if let Some(entry) = self.weights.get_mut(&pair) {
            *entry -= w.clone();
            if entry.is_zero() {
                self.weights.remove(&pair);
            }
        }
    }
}

/// Nonnegative weights on ordered pairs, diagonal allowed; a transport plan.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coupling<S> {
    weights: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> Coupling<S> {
    pub fn empty() -> Self {
        Coupling {
            weights: BTreeMap::new(),
        }
    }

    pub fn from_pairs<I>(space: &FiniteMetricSpace<S>, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), S)>,
    {
        let mut map: BTreeMap<(usize, usize), S> = BTreeMap::new();
        for ((x, y), w) in pairs {
            space.check_index(x)?;
            space.check_index(y)?;
            if w < S::zero() {
                return Err(Error::NonpositiveWeight {
                    detail: format!("weight {w} at pair ({x}, {y})"),
                });
            }
            if w.is_zero() {
                continue;
            }
            let entry = map.entry((x, y)).or_insert_with(S::zero);
            *entry += w;
        }
        Ok(Coupling { weights: map })
    }

    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &S)> + '_ {
        self.weights.iter().map(|(&p, w)| (p, w))
    }

    pub fn weight(&self, x: usize, y: usize) -> S {
        self.weights.get(&(x, y)).cloned().unwrap_or_else(S::zero)
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub(crate) fn insert_mass(&mut self, pair: (usize, usize), w: S) {
        if !w.is_zero() {
            let entry = self.weights.entry(pair).or_insert_with(S::zero);
            *entry += w;
        }
    }

    /// Transport cost `sum d(x,y) * pi(x,y)`.
    pub fn cost(&self, space: &FiniteMetricSpace<S>) -> S {
        self.weights.iter().fold(S::zero(), |acc, (&(x, y), w)| {
            acc + space.dist(x, y) * w.clone()
        })
    }

    /// Pushforward marginals `(p1#pi, p2#pi)`.
    pub fn marginals(&self) -> (PointMeasure<S>, PointMeasure<S>) {
        let mut left = PointMeasure::zero();
        let mut right = PointMeasure::zero();
        for (&(x, y), w) in &self.weights {
            left.insert_mass(x, w.clone());
            right.insert_mass(y, w.clone());
        }
        (left, right)
    }
}

/// Evaluate `m` against `f`: `sum_i w_i f(i)`. Requires `f(base) = 0`.
pub fn pair<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    m: &FreeElement<S>,
    f: &LipschitzFunction<S>,
) -> Result<S> {
    f.check_space(space)?;
    if !f.value(space.base()).is_zero() {
        return Err(Error::NonzeroAtBase { base: space.base() });
    }
    let mut acc = S::zero();
    for (i, w) in m.weights() {
        space.check_index(i)?;
        acc += w.clone() * f.value(i).clone();
    }
    Ok(acc)
}

/// Optimal Lipschitz constant `max_{i != j} |f(i) - f(j)| / d(i, j)`.
pub fn lip_norm<S: Scalar>(space: &FiniteMetricSpace<S>, f: &LipschitzFunction<S>) -> Result<S> {
    f.check_space(space)?;
    let mut best = S::zero();
    for i in 0..space.len() {
        for j in (i + 1)..space.len() {
            let q = (f.value(i).clone() - f.value(j).clone()).abs() / space.dist(i, j);
            if q > best {
                best = q;
            }
        }
    }
    Ok(best)
}

/// Incremental quotient `(f(x) - f(y)) / d(x, y)` for `x != y`.
pub fn phi<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    f: &LipschitzFunction<S>,
    x: usize,
    y: usize,
) -> Result<S> {
    f.check_space(space)?;
    space.check_index(x)?;
    space.check_index(y)?;
    if x == y {
        return Err(Error::DiagonalPair { index: x });
    }
    Ok((f.value(x).clone() - f.value(y).clone()) / space.dist(x, y))
}

/// Elementary molecule `(delta(x) - delta(y)) / d(x, y)`.
pub fn molecule<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    x: usize,
    y: usize,
) -> Result<FreeElement<S>> {
    space.check_index(x)?;
    space.check_index(y)?;
    if x == y {
        return Err(Error::DiagonalPair { index: x });
    }
    let inv = S::one() / space.dist(x, y);
    FreeElement::from_weights(space, [(x, inv.clone()), (y, -inv)])
}

/// The element `sum mu(x,y) * m_xy` represented by a discrete measure.
pub fn combination_to_element<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    mu: &DeLeeuwMeasure<S>,
) -> Result<FreeElement<S>> {
    let mut weights: Vec<(usize, S)> = Vec::new();
    for ((x, y), w) in mu.pairs() {
        let inv = w.clone() / space.dist(x, y);
        weights.push((x, inv.clone()));
        weights.push((y, -inv));
    }
    FreeElement::from_weights(space, weights)
}

/// Split into positive and negative parts, then top up the lighter side with
/// mass at the base point so both totals agree.
pub fn jordan_split<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    m: &FreeElement<S>,
) -> (PointMeasure<S>, PointMeasure<S>) {
    let mut plus = PointMeasure::zero();
    let mut minus = PointMeasure::zero();
    for (i, w) in m.weights() {
        if *w > S::zero() {
            plus.insert_mass(i, w.clone());
        } else {
            minus.insert_mass(i, -w.clone());
        }
    }
    let p = plus.total();
    let n = minus.total();
    if p < n {
        plus.insert_mass(space.base(), n - p);
    } else if n < p {
        minus.insert_mass(space.base(), p - n);
    }
    (plus, minus)
}

/// Rewrite overlapping mass at `(x, y)` and `(y, z)` onto `(x, z)`, using
/// `m_xz = (d(x,y)/d(x,z)) m_xy + (d(y,z)/d(x,z)) m_yz` for aligned triples.
/// The represented element and the total mass are preserved; the side with
/// the smaller mass-to-distance ratio is zeroed.
pub fn split_overlap<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    mu: &DeLeeuwMeasure<S>,
    x: usize,
    y: usize,
    z: usize,
) -> Result<DeLeeuwMeasure<S>> {
    space.check_index(x)?;
    space.check_index(y)?;
    space.check_index(z)?;
    if x == y || y == z || x == z {
        return Err(Error::DiagonalPair { index: y });
    }
    if !space.is_metric_triple(x, y, z)? {
        return Err(Error::NotAligned { x, y, z });
    }
    let a = mu.weight(x, y);
    let b = mu.weight(y, z);
    let dxy = space.dist(x, y);
    let dyz = space.dist(y, z);
    let dxz = space.dist(x, z);
    // transferable amount: t*dxy from (x,y) and t*dyz from (y,z) merge into
    // t*dxz at (x,z); t is capped by whichever side runs out first
    let ta = a.clone() / dxy.clone();
    let tb = b.clone() / dyz.clone();
    let t = if ta <= tb { ta } else { tb };
    let mut out = mu.clone();
    if t.is_zero() {
        return Ok(out);
    }
    out.remove_mass((x, y), &(t.clone() * dxy));
    out.remove_mass((y, z), &(t.clone() * dyz));
    out.insert_mass((x, z), t * dxz);
    Ok(out)
}
