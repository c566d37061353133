//! Lipschitz extension analysis.
//!
//! For values `f` prescribed on a subset `A`, the sup- and inf-convolutions
//! `E^-f(x) = max_p (f(p) - d(p,x))` and `E^+f(x) = min_p (f(p) + d(p,x))`
//! are the smallest and largest 1-Lipschitz extensions. The forced set is
//! where all extensions agree; forced pairs are the ordered pairs whose
//! incremental quotient is pinned to 1 by every extension.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::free::LipschitzFunction;
use crate::metric::{FiniteMetricSpace, SegmentSet};
use crate::num::{within_tol, Scalar};

/// Values prescribed on a nonempty subset of points, 1-Lipschitz there.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionProblem<S> {
    values: BTreeMap<usize, S>,
}

impl<S: Scalar> ExtensionProblem<S> {
    /// Validate that the prescribed values are 1-Lipschitz on their domain.
    pub fn new(space: &FiniteMetricSpace<S>, values: BTreeMap<usize, S>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyAnchorSet);
        }
        for &i in values.keys() {
            space.check_index(i)?;
        }
        let entries: Vec<(usize, &S)> = values.iter().map(|(&i, v)| (i, v)).collect();
        for (a, &(p, fp)) in entries.iter().enumerate() {
            for &(q, fq) in entries.iter().skip(a + 1) {
                let gap = (fp.clone() - fq.clone()).abs();
                let d = space.dist(p, q);
                let slack = space.tol().clone() * (S::one() + d.clone());
                if gap > d + slack {
                    return Err(Error::NotOneLipschitz { p, q });
                }
            }
        }
        Ok(ExtensionProblem { values })
    }

    /// Skip validation; used when the values are 1-Lipschitz by construction
    /// (e.g. dual potentials), where float rounding could trip the check.
    pub fn new_unchecked<I: IntoIterator<Item = (usize, S)>>(values: I) -> Self {
        ExtensionProblem {
            values: values.into_iter().collect(),
        }
    }

    /// The subset `A` where values are prescribed.
    pub fn domain(&self) -> BTreeSet<usize> {
        self.values.keys().copied().collect()
    }

    pub fn prescribed(&self) -> impl Iterator<Item = (usize, &S)> + '_ {
        self.values.iter().map(|(&i, v)| (i, v))
    }

    pub fn value_at(&self, i: usize) -> Option<&S> {
        self.values.get(&i)
    }

    /// Sup-convolution: the smallest 1-Lipschitz extension at `x`.
    pub fn mcshane_lower(&self, space: &FiniteMetricSpace<S>, x: usize) -> Result<S> {
        space.check_index(x)?;
        let mut best: Option<S> = None;
        for (&p, fp) in &self.values {
            let candidate = fp.clone() - space.dist(p, x);
            if best.as_ref().is_none_or(|b| candidate > *b) {
                best = Some(candidate);
            }
        }
        best.ok_or(Error::EmptyAnchorSet)
    }

    /// Inf-convolution: the largest 1-Lipschitz extension at `x`.
    pub fn mcshane_upper(&self, space: &FiniteMetricSpace<S>, x: usize) -> Result<S> {
        space.check_index(x)?;
        let mut best: Option<S> = None;
        for (&p, fp) in &self.values {
            let candidate = fp.clone() + space.dist(p, x);
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
        }
        best.ok_or(Error::EmptyAnchorSet)
    }

    pub fn mcshane_lower_all(&self, space: &FiniteMetricSpace<S>) -> Result<LipschitzFunction<S>> {
        let values = (0..space.len())
            .map(|x| self.mcshane_lower(space, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(LipschitzFunction::new(values))
    }

    pub fn mcshane_upper_all(&self, space: &FiniteMetricSpace<S>) -> Result<LipschitzFunction<S>> {
        let values = (0..space.len())
            .map(|x| self.mcshane_upper(space, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(LipschitzFunction::new(values))
    }

    /// Points where every 1-Lipschitz extension takes the same value:
    /// the union of segments `[p, q]` over tight pairs `f(p) - f(q) = d(p,q)`
    /// in `A` (diagonal pairs contribute the points of `A` themselves).
    pub fn forced_set(&self, space: &FiniteMetricSpace<S>) -> Result<SegmentSet> {
        let mut members: BTreeSet<usize> = self.values.keys().copied().collect();
        let entries: Vec<(usize, &S)> = self.values.iter().map(|(&i, v)| (i, v)).collect();
        for &(p, fp) in &entries {
            for &(q, fq) in &entries {
                if p == q {
                    continue;
                }
                let gap = fp.clone() - fq.clone();
                let d = space.dist(p, q);
                if within_tol(&gap, &d, space.tol(), &d) {
                    members.extend(space.segment(p, q)?.iter());
                }
            }
        }
        Ok(SegmentSet { members })
    }

    /// Ordered pairs `(x, y)` with `x != y` such that every 1-Lipschitz
    /// extension `F` has `F(x) - F(y) = d(x, y)`. The minimum of
    /// `F(x) - F(y)` over all extensions is `max(E^-(x) - E^+(y), -d(x,y))`,
    /// so the pair is forced exactly when `E^-(x) - E^+(y) = d(x, y)`.
    pub fn forced_pairs(&self, space: &FiniteMetricSpace<S>) -> Result<Vec<(usize, usize)>> {
        let lower = self.mcshane_lower_all(space)?;
        let upper = self.mcshane_upper_all(space)?;
        let mut out = Vec::new();
        for x in 0..space.len() {
            for y in 0..space.len() {
                if x == y {
                    continue;
                }
                let gap = lower.value(x).clone() - upper.value(y).clone();
                let d = space.dist(x, y);
                if within_tol(&gap, &d, space.tol(), &d) {
                    out.push((x, y));
                }
            }
        }
        Ok(out)
    }

    /// `t E^+ + (1-t) E^-` for `t` in `[0, 1]`: a 1-Lipschitz extension.
    pub fn interpolate_extension(
        &self,
        space: &FiniteMetricSpace<S>,
        t: &S,
    ) -> Result<LipschitzFunction<S>> {
        if *t < S::zero() || *t > S::one() {
            return Err(Error::Parse(format!(
                "interpolation parameter {t} outside [0, 1]"
            )));
        }
        let lower = self.mcshane_lower_all(space)?;
        let upper = self.mcshane_upper_all(space)?;
        let one_minus = S::one() - t.clone();
        let values = (0..space.len())
            .map(|x| {
                t.clone() * upper.value(x).clone() + one_minus.clone() * lower.value(x).clone()
            })
            .collect();
        Ok(LipschitzFunction::new(values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::lip_norm;
    use crate::num::Rat;

    fn line(coords: &[i64]) -> FiniteMetricSpace<Rat> {
        FiniteMetricSpace::from_line_points(coords.iter().map(|&c| Rat::from_int(c)).collect(), 0)
            .unwrap()
    }

    fn prob(space: &FiniteMetricSpace<Rat>, vals: &[(usize, i64)]) -> ExtensionProblem<Rat> {
        ExtensionProblem::new(
            space,
            vals.iter().map(|&(i, v)| (i, Rat::from_int(v))).collect(),
        )
        .unwrap()
    }

    #[test]
    fn rejects_bad_problems() {
        let space = line(&[0, 1, 2, 3]);
        assert!(matches!(
            ExtensionProblem::<Rat>::new(&space, BTreeMap::new()),
            Err(Error::EmptyAnchorSet)
        ));
        let steep = ExtensionProblem::new(
            &space,
            BTreeMap::from([(0, Rat::from_int(0)), (1, Rat::from_int(5))]),
        );
        assert!(matches!(steep, Err(Error::NotOneLipschitz { p: 0, q: 1 })));
        // interpolation parameter outside [0, 1]
        let p = prob(&space, &[(0, 0)]);
        assert!(p.interpolate_extension(&space, &Rat::from_int(2)).is_err());
        assert!(p
            .interpolate_extension(&space, &Rat::from_ratio(-1, 2))
            .is_err());
    }

    #[test]
    fn envelopes_restrict_to_prescribed_values() {
        let space = line(&[0, 1, 2, 3]);
        let p = prob(&space, &[(0, 0), (3, 3)]);
        for (&i, v) in [(0usize, 0i64), (3, 3)].iter().map(|t| (&t.0, t.1)) {
            assert_eq!(p.mcshane_lower(&space, i).unwrap(), Rat::from_int(v));
            assert_eq!(p.mcshane_upper(&space, i).unwrap(), Rat::from_int(v));
        }
        // forced on the geodesic between the tight endpoints
        assert_eq!(p.mcshane_lower(&space, 1).unwrap(), Rat::from_int(1));
        assert_eq!(p.mcshane_upper(&space, 1).unwrap(), Rat::from_int(1));
    }

    #[test]
    fn single_anchor_envelopes_are_cones() {
        let space = line(&[0, 1, 2]);
        let p = prob(&space, &[(0, 0)]);
        for x in 0..space.len() {
            assert_eq!(p.mcshane_lower(&space, x).unwrap(), -space.dist(x, 0));
            assert_eq!(p.mcshane_upper(&space, x).unwrap(), space.dist(x, 0));
        }
        // no pair is forced once the envelopes split off the anchor set
        assert!(p.forced_pairs(&space).unwrap().is_empty());
        // symmetric interpolation is identically zero
        let mid = p
            .interpolate_extension(&space, &Rat::from_ratio(1, 2))
            .unwrap();
        assert_eq!(mid, LipschitzFunction::zero(&space));
    }

    #[test]
    fn forced_set_examples() {
        let space = line(&[0, 1, 2, 3]);
        // no tight pair: forced set is A itself
        let loose = prob(&space, &[(0, 0), (3, 1)]);
        assert_eq!(
            loose.forced_set(&space).unwrap(),
            SegmentSet::from_iter([0, 3])
        );

        // tight pair (3, 0): the whole segment is forced
        let tight = prob(&space, &[(0, 0), (3, 3)]);
        assert_eq!(
            tight.forced_set(&space).unwrap(),
            SegmentSet::from_iter([0, 1, 2, 3])
        );

        // snowflake: pair stays tight but the segment collapses to endpoints
        let snow: FiniteMetricSpace<f64> =
            FiniteMetricSpace::from_line_points(vec![0.0, 1.0, 2.0, 3.0], 0)
                .unwrap()
                .snowflake(1, 2)
                .unwrap();
        let f = ExtensionProblem::new(
            &snow,
            BTreeMap::from([(0usize, 0.0), (3usize, snow.dist(3, 0))]),
        )
        .unwrap();
        assert_eq!(f.forced_set(&snow).unwrap(), SegmentSet::from_iter([0, 3]));
    }

    #[test]
    fn forced_pairs_examples() {
        let space = line(&[0, 1, 2, 3]);
        // A = M: exactly the tight pairs of f itself
        let full = prob(&space, &[(0, 0), (1, 1), (2, 1), (3, 2)]);
        let pairs = full.forced_pairs(&space).unwrap();
        assert!(pairs.contains(&(1, 0)));
        assert!(pairs.contains(&(3, 2)));
        assert!(!pairs.contains(&(2, 1)));
        assert!(!pairs.contains(&(0, 1)));

        // unique extension: every descending pair is forced
        let ident = prob(&space, &[(0, 0), (3, 3)]);
        let pairs = ident.forced_pairs(&space).unwrap();
        for x in 0..4 {
            for y in 0..4 {
                if x != y {
                    assert_eq!(pairs.contains(&(x, y)), x > y, "pair ({x},{y})");
                }
            }
        }

        // forced pair coordinates always live in the forced set
        let forced = ident.forced_set(&space).unwrap();
        for (x, y) in pairs {
            assert!(forced.contains(x) && forced.contains(y));
        }
    }

    #[test]
    fn envelopes_dominate_a_thousand_random_interpolations() {
        use rand::Rng;
        let space = line(&[0, 1, 3, 4, 9]);
        let p = prob(&space, &[(0, 0), (2, 3), (4, -1)]);
        let lower = p.mcshane_lower_all(&space).unwrap();
        let upper = p.mcshane_upper_all(&space).unwrap();
        let mut rng = crate::harness::rng_for(11, 0);
        for _ in 0..1000 {
            let t = Rat::from_ratio(rng.gen_range(0..=1024), 1024);
            let f = p.interpolate_extension(&space, &t).unwrap();
            assert!(lip_norm(&space, &f).unwrap() <= Rat::from_int(1));
            for x in 0..space.len() {
                assert!(lower.value(x) <= f.value(x));
                assert!(f.value(x) <= upper.value(x));
            }
        }
    }

    #[test]
    fn eps_formula_recovers_the_forced_set() {
        // the general formula: union of [p,q]_eps over near-tight pairs,
        // intersected over eps; on a finite space it stabilises at the
        // compact formula once eps is small enough
        let space = line(&[0, 1, 2, 3]);
        let p = prob(&space, &[(0, 0), (3, 3)]);
        let forced = p.forced_set(&space).unwrap();
        let mut previous: Option<SegmentSet> = None;
        for eps_den in [1i64, 4, 16, 64, 256] {
            let eps = Rat::from_ratio(1, eps_den);
            let mut union = SegmentSet::from_iter(p.domain());
            let entries: Vec<(usize, Rat)> = p.prescribed().map(|(i, v)| (i, v.clone())).collect();
            for &(a, ref fa) in &entries {
                for &(b, ref fb) in &entries {
                    if a != b && fa.clone() - fb.clone() > space.dist(a, b) - eps.clone() {
                        union = union.union(&space.segment_eps(a, b, &eps).unwrap());
                    }
                }
            }
            // each eps-stage contains the forced set and shrinks with eps
            assert!(forced.is_subset(&union));
            if let Some(prev) = &previous {
                assert!(union.is_subset(prev));
            }
            previous = Some(union);
        }
        // stabilised: the intersection over eps is the compact-formula set
        assert_eq!(previous.unwrap(), forced);
    }

    #[test]
    fn interpolation_is_sandwiched_and_lipschitz() {
        let space = line(&[0, 2, 3, 7]);
        let p = prob(&space, &[(0, 0), (2, -1)]);
        let lower = p.mcshane_lower_all(&space).unwrap();
        let upper = p.mcshane_upper_all(&space).unwrap();
        for t in [0i64, 1, 2, 3] {
            let f = p
                .interpolate_extension(&space, &Rat::from_ratio(t, 3))
                .unwrap();
            assert!(lip_norm(&space, &f).unwrap() <= Rat::from_int(1));
            for x in 0..space.len() {
                assert!(lower.value(x) <= f.value(x) && f.value(x) <= upper.value(x));
            }
        }
        assert_eq!(
            p.interpolate_extension(&space, &Rat::from_int(0)).unwrap(),
            lower
        );
        assert_eq!(
            p.interpolate_extension(&space, &Rat::from_int(1)).unwrap(),
            upper
        );
    }
}
