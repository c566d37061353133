//! Extreme-point tests for molecules and face support bounds.

use crate::error::{Error, Result};
use crate::free::{pair, FreeElement, LipschitzFunction};
use crate::metric::{FiniteMetricSpace, SegmentSet};
use crate::num::{within_tol, Scalar};
use crate::transport::free_norm;

/// A molecule `m_xy` is an extreme point of the unit ball exactly when the
/// metric segment `[x, y]` is trivial.
pub fn is_extreme_molecule<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    x: usize,
    y: usize,
) -> Result<bool> {
    if x == y {
        return Err(Error::DiagonalPair { index: x });
    }
    let segment = space.segment(x, y)?;
    Ok(segment.len() == 2)
}

/// Witness of non-extremality: an interior point `y` of `[x, z]` together
/// with the convex coefficients of
/// `m_xz = (d(x,y)/d(x,z)) m_xy + (d(y,z)/d(x,z)) m_yz`.
pub fn non_extremality_witness<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    x: usize,
    z: usize,
) -> Result<Option<(usize, S, S)>> {
    if x == z {
        return Err(Error::DiagonalPair { index: x });
    }
    let segment = space.segment(x, z)?;
    let interior = segment.iter().find(|&p| p != x && p != z);
    Ok(interior.map(|y| {
        let dxz = space.dist(x, z);
        (y, space.dist(x, y) / dxz.clone(), space.dist(y, z) / dxz)
    }))
}

/// Union of all metric segments between points of `supp(m) + {base}`: the
/// region that can support anything sharing a face with `m`.
pub fn face_support_bound<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    m: &FreeElement<S>,
) -> Result<SegmentSet> {
    let mut points = m.support();
    points.insert(space.base());
    let points: Vec<usize> = points.into_iter().collect();
    let mut out = SegmentSet::from_iter(points.iter().copied());
    for (a, &p) in points.iter().enumerate() {
        for &q in points.iter().skip(a + 1) {
            out = out.union(&space.segment(p, q)?);
        }
    }
    Ok(out)
}

/// When `f` norms both `m` and `m'` at a common norm value, `m` and `m'`
/// share a face of the ball and `supp(m')` must fall inside the segment
/// bound of `m`. Preconditions are verified against the solver.
pub fn check_face_alignment<S: Scalar>(
    space: &FiniteMetricSpace<S>,
    m: &FreeElement<S>,
    m_prime: &FreeElement<S>,
    f: &LipschitzFunction<S>,
) -> Result<bool> {
    let tol = space.tol().clone();
    let (norm_m, _) = free_norm(space, m)?;
    let (norm_mp, _) = free_norm(space, m_prime)?;
    let pm = pair(space, m, f)?;
    let pmp = pair(space, m_prime, f)?;
    let shared = within_tol(&norm_m, &norm_mp, &tol, &norm_m)
        && within_tol(&pm, &norm_m, &tol, &norm_m)
        && within_tol(&pmp, &norm_mp, &tol, &norm_m);
    if !shared {
        return Err(Error::NonpositiveWeight {
            detail: format!(
                "f does not norm both elements at a shared value: |m| = {norm_m}, |m'| = {norm_mp}, <m,f> = {pm}, <m',f> = {pmp}"
            ),
        });
    }
    let bound = face_support_bound(space, m)?;
    Ok(m_prime.support().iter().all(|&p| bound.contains(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::{combination_to_element, molecule, DeLeeuwMeasure};
    use crate::num::Rat;

    fn line(coords: &[i64]) -> FiniteMetricSpace<Rat> {
        FiniteMetricSpace::from_line_points(coords.iter().map(|&c| Rat::from_int(c)).collect(), 0)
            .unwrap()
    }

    #[test]
    fn adjacency_decides_extremality_on_the_line() {
        let space = line(&[0, 1, 2]);
        assert!(!is_extreme_molecule(&space, 0, 2).unwrap());
        assert!(is_extreme_molecule(&space, 0, 1).unwrap());
        assert!(is_extreme_molecule(&space, 1, 2).unwrap());
        assert_eq!(
            is_extreme_molecule(&space, 1, 2).unwrap(),
            is_extreme_molecule(&space, 2, 1).unwrap()
        );
        assert!(matches!(
            is_extreme_molecule(&space, 1, 1),
            Err(Error::DiagonalPair { index: 1 })
        ));
    }

    #[test]
    fn snowflaked_molecules_are_all_extreme() {
        let snow: FiniteMetricSpace<f64> =
            FiniteMetricSpace::from_line_points(vec![0.0, 1.0, 2.0, 3.0], 0)
                .unwrap()
                .snowflake(1, 2)
                .unwrap();
        for x in 0..snow.len() {
            for y in 0..snow.len() {
                if x != y {
                    assert!(is_extreme_molecule(&snow, x, y).unwrap());
                }
            }
        }
    }

    #[test]
    fn splitting_witness_reconstructs_the_molecule() {
        let space = line(&[0, 1, 2]);
        let (y, a, b) = non_extremality_witness(&space, 2, 0).unwrap().unwrap();
        assert_eq!(y, 1);
        assert_eq!(a.clone() + b.clone(), Rat::from_int(1));
        // m_xz = a m_xy + b m_yz, checked as elements
        let mxz = molecule(&space, 2, 0).unwrap();
        let mxy = molecule(&space, 2, 1).unwrap();
        let myz = molecule(&space, 1, 0).unwrap();
        assert_eq!(mxy.scaled(&a).add(&myz.scaled(&b)), mxz);
        // and through a measure carrying the same two pieces
        let mu = DeLeeuwMeasure::from_pairs(&space, [((2, 1), a), ((1, 0), b)]).unwrap();
        assert_eq!(combination_to_element(&space, &mu).unwrap(), mxz);

        assert!(non_extremality_witness(&space, 1, 0).unwrap().is_none());
    }

    #[test]
    fn face_bounds() {
        let space = line(&[0, 1, 2]);
        // zero element: just the base point
        assert_eq!(
            face_support_bound(&space, &FreeElement::zero()).unwrap(),
            SegmentSet::from_iter([0])
        );
        // full support: everything
        let m = FreeElement::from_weights(&space, [(1, Rat::from_int(1)), (2, Rat::from_int(1))])
            .unwrap();
        assert_eq!(
            face_support_bound(&space, &m).unwrap(),
            SegmentSet::from_iter([0, 1, 2])
        );
        // molecule to base: the whole segment through interior points
        let m20 = molecule(&space, 2, 0).unwrap();
        assert_eq!(
            face_support_bound(&space, &m20).unwrap(),
            SegmentSet::from_iter([0, 1, 2])
        );
    }

    #[test]
    fn shared_norming_function_keeps_supports_aligned() {
        let space = line(&[0, 1, 2]);
        let m20 = molecule(&space, 2, 0).unwrap();
        let m21 = molecule(&space, 2, 1).unwrap();
        let d0 = LipschitzFunction::dist_to_base(&space);
        // d(., 0) norms both molecules
        assert!(check_face_alignment(&space, &m20, &m20, &d0).unwrap());
        assert!(check_face_alignment(&space, &m20, &m21, &d0).unwrap());
        // for an extreme molecule, only elements inside its own segment bound
        // pass; m_21 shares the norming function with m_10 but sits outside
        let m10 = molecule(&space, 1, 0).unwrap();
        assert!(check_face_alignment(&space, &m10, &m10, &d0).unwrap());
        let far = molecule(&space, 2, 1).unwrap();
        assert!(!check_face_alignment(&space, &m10, &far, &d0).unwrap());
        // mismatched norming values are reported as precondition failures
        let steep = molecule(&space, 2, 0).unwrap();
        let f21 = {
            let mut v = vec![Rat::from_int(0); 3];
            v[1] = Rat::from_int(-1);
            v[2] = Rat::from_int(0);
            LipschitzFunction::new(v)
        };
        assert!(check_face_alignment(&space, &steep, &steep, &f21).is_err());
    }
}
