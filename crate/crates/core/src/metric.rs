//! Finite pointed metric spaces, metric segments, and metric transforms.

use std::collections::BTreeSet;

use crate::error::{Error, MetricViolation, Result};
use crate::num::{within_tol, Scalar};

/// Distances are either stored densely or derived from line coordinates.
/// The line form keeps dyadic grids with thousands of points cheap and
/// remembers that the space is a subset of the real line.
#[derive(Debug, Clone, PartialEq)]
enum DistanceStore<S> {
    Dense(Vec<Vec<S>>),
    Line(Vec<S>),
}

/// A finite metric space with a distinguished base point.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSpace<S: Scalar> {
    labels: Vec<String>,
    store: DistanceStore<S>,
    base: usize,
    /// Relative tolerance scale for alignment equality; zero in exact mode.
    tol: S,
}

/// A set of point indices, e.g. a metric segment `[p, q]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentSet {
    pub members: BTreeSet<usize>,
}

impl FromIterator<usize> for SegmentSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        SegmentSet {
            members: iter.into_iter().collect(),
        }
    }
}

impl SegmentSet {
    pub fn contains(&self, x: usize) -> bool {
        self.members.contains(&x)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn union(&self, other: &SegmentSet) -> SegmentSet {
        SegmentSet {
            members: self.members.union(&other.members).copied().collect(),
        }
    }

    pub fn is_subset(&self, other: &SegmentSet) -> bool {
        self.members.is_subset(&other.members)
    }
}

impl<S: Scalar> FiniteMetricSpace<S> {
    /// Build from an explicit distance matrix, validating all metric axioms.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<S>>, base: usize) -> Result<Self> {
        let space = FiniteMetricSpace {
            labels,
            store: DistanceStore::Dense(dist),
            base,
            tol: S::default_tol(),
        };
        space.validate()?;
        Ok(space)
    }

    /// Build from a matrix with default labels `p0, p1, ...`.
    pub fn from_matrix(dist: Vec<Vec<S>>, base: usize) -> Result<Self> {
        let labels = (0..dist.len()).map(|i| format!("p{i}")).collect();
        Self::new(labels, dist, base)
    }

    /// Space over strictly increasing real-line coordinates with
    /// `d(i, j) = |t_i - t_j|`.
    pub fn from_line_points(coords: Vec<S>, base: usize) -> Result<Self> {
        if coords.is_empty() {
            return Err(MetricViolation::Empty.into());
        }
        if base >= coords.len() {
            return Err(MetricViolation::BaseOutOfRange {
                base,
                len: coords.len(),
            }
            .into());
        }
        for i in 1..coords.len() {
            if coords[i] == coords[i - 1] {
                return Err(Error::DuplicateCoordinate { index: i });
            }
            if coords[i] < coords[i - 1] {
                return Err(Error::UnsortedCoordinates { index: i });
            }
        }
        let labels = coords.iter().map(|t| t.to_text()).collect();
        Ok(FiniteMetricSpace {
            labels,
            store: DistanceStore::Line(coords),
            base,
            tol: S::default_tol(),
        })
    }

    pub fn len(&self) -> usize {
        match &self.store {
            DistanceStore::Dense(d) => d.len(),
            DistanceStore::Line(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Line coordinates when the space was built by [`Self::from_line_points`].
    pub fn line_coords(&self) -> Option<&[S]> {
        match &self.store {
            DistanceStore::Line(c) => Some(c),
            DistanceStore::Dense(_) => None,
        }
    }

    pub fn dist(&self, i: usize, j: usize) -> S {
        match &self.store {
            DistanceStore::Dense(d) => d[i][j].clone(),
            DistanceStore::Line(c) => (c[i].clone() - c[j].clone()).abs(),
        }
    }

    /// Dense copy of the distance matrix.
    pub fn matrix(&self) -> Vec<Vec<S>> {
        (0..self.len())
            .map(|i| (0..self.len()).map(|j| self.dist(i, j)).collect())
            .collect()
    }

    pub fn tol(&self) -> &S {
        &self.tol
    }

    pub fn set_tol(&mut self, tol: S) {
        self.tol = tol;
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    pub fn diameter(&self) -> S {
        let mut best = S::zero();
        match &self.store {
            DistanceStore::Line(c) => {
                if c.len() > 1 {
                    best = c[c.len() - 1].clone() - c[0].clone();
                }
            }
            DistanceStore::Dense(d) => {
                for row in d {
                    for v in row {
                        if *v > best {
                            best = v.clone();
                        }
                    }
                }
            }
        }
        best
    }

    /// Check all metric axioms, reporting the first violation found.
    #[allow(clippy::needless_range_loop)]
    pub fn validate(&self) -> std::result::Result<(), MetricViolation> {
        let n = self.len();
        if n == 0 {
            return Err(MetricViolation::Empty);
        }
        if self.base >= n {
            return Err(MetricViolation::BaseOutOfRange {
                base: self.base,
                len: n,
            });
        }
        if self.labels.len() != n {
            return Err(MetricViolation::LabelCountMismatch {
                labels: self.labels.len(),
                len: n,
            });
        }
        let dense = match &self.store {
            // Strictly increasing coordinates make the axioms automatic.
            DistanceStore::Line(_) => return Ok(()),
            DistanceStore::Dense(d) => d,
        };
        for (i, row) in dense.iter().enumerate() {
            if row.len() != n {
                return Err(MetricViolation::ShapeMismatch { row: i });
            }
        }
        // exact scalars are always finite; floats must be screened for
        // NaN/infinity before any comparisons are trusted
        if !S::EXACT {
            for i in 0..n {
                for j in 0..n {
                    if !dense[i][j].to_f64().is_finite() {
                        return Err(MetricViolation::NonFinite { i, j });
                    }
                }
            }
        }
        for i in 0..n {
            if !dense[i][i].is_zero() {
                return Err(MetricViolation::NonzeroDiagonal { i });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if dense[i][j] != dense[j][i] {
                    return Err(MetricViolation::Asymmetric { i, j });
                }
                if dense[i][j] <= S::zero() {
                    return Err(MetricViolation::NonpositiveOffDiagonal { i, j });
                }
            }
        }
        // d(i,k) <= d(i,j) + d(j,k), with slack tol*(1+d(i,k)) in float mode
        // so that e.g. rounded Euclidean matrices still validate.
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let direct = dense[i][k].clone();
                    let via = dense[i][j].clone() + dense[j][k].clone();
                    let slack = self.tol.clone() * (S::one() + direct.clone());
                    if direct > via + slack {
                        return Err(MetricViolation::Triangle { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    fn aligned(&self, p: usize, x: usize, q: usize) -> bool {
        let through = self.dist(p, x) + self.dist(x, q);
        let direct = self.dist(p, q);
        within_tol(&through, &direct, &self.tol, &direct)
    }

    /// Metric segment `[p, q] = { x : d(p,x) + d(x,q) = d(p,q) }`.
    pub fn segment(&self, p: usize, q: usize) -> Result<SegmentSet> {
        self.check_index(p)?;
        self.check_index(q)?;
        Ok(SegmentSet {
            members: (0..self.len()).filter(|&x| self.aligned(p, x, q)).collect(),
        })
    }

    /// Open enlargement `[p, q]_eps = { x : d(p,x) + d(x,q) < d(p,q) + eps }`.
    pub fn segment_eps(&self, p: usize, q: usize, eps: &S) -> Result<SegmentSet> {
        self.check_index(p)?;
        self.check_index(q)?;
        if *eps <= S::zero() {
            return Err(Error::NonpositiveWeight {
                detail: format!("eps = {eps}"),
            });
        }
        let bound = self.dist(p, q) + eps.clone();
        Ok(SegmentSet {
            members: (0..self.len())
                .filter(|&x| self.dist(p, x) + self.dist(x, q) < bound)
                .collect(),
        })
    }

    /// Whether `(p, x, q)` is a metric triple, i.e. `x` lies in `[p, q]`.
    pub fn is_metric_triple(&self, p: usize, x: usize, q: usize) -> Result<bool> {
        self.check_index(p)?;
        self.check_index(x)?;
        self.check_index(q)?;
        Ok(self.aligned(p, x, q))
    }

    /// Snowflake transform: same points with distance `d^theta`,
    /// `theta = num/den` in `(0, 1)`.
    #[allow(clippy::needless_range_loop)]
    pub fn snowflake(&self, theta_num: u32, theta_den: u32) -> Result<Self> {
        if theta_num == 0 || theta_den == 0 || theta_num >= theta_den {
            return Err(Error::ThetaOutOfRange);
        }
        let n = self.len();
        let mut dist = vec![vec![S::zero(); n]; n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = self.dist(i, j).pow_ratio(theta_num, theta_den).ok_or_else(|| {
                    Error::InexactPower {
                        detail: format!(
                            "d({i},{j})^({theta_num}/{theta_den}) has no exact value in this backend"
                        ),
                    }
                })?;
                dist[i][j] = v.clone();
                dist[j][i] = v;
            }
        }
        let mut out = FiniteMetricSpace {
            labels: self.labels.clone(),
            store: DistanceStore::Dense(dist),
            base: self.base,
            tol: self.tol.clone(),
        };
        out.tol = self.tol.clone();
        out.validate()?;
        Ok(out)
    }

    /// A space is concave when every metric segment is trivial.
    pub fn is_concave(&self) -> bool {
        let n = self.len();
        for p in 0..n {
            for q in 0..n {
                if p == q {
                    continue;
                }
                for x in 0..n {
                    if x != p && x != q && self.aligned(p, x, q) {
                        return false;
                    }
                }
            }
        }
        true
    }
}
