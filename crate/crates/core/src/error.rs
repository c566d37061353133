use std::fmt;

/// First metric axiom found to fail by [`crate::FiniteMetricSpace::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MetricViolation {
    Empty,
    BaseOutOfRange { base: usize, len: usize },
    LabelCountMismatch { labels: usize, len: usize },
    ShapeMismatch { row: usize },
    NonFinite { i: usize, j: usize },
    NonzeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    NonpositiveOffDiagonal { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::Empty => write!(f, "a metric space needs at least one point"),
            MetricViolation::BaseOutOfRange { base, len } => {
                write!(f, "base point {base} out of range for {len} points")
            }
            MetricViolation::LabelCountMismatch { labels, len } => {
                write!(f, "{labels} labels for {len} points")
            }
            MetricViolation::ShapeMismatch { row } => {
                write!(f, "distance matrix row {row} has the wrong length")
            }
            MetricViolation::NonFinite { i, j } => write!(f, "dist[{i}][{j}] is not finite"),
            MetricViolation::NonzeroDiagonal { i } => write!(f, "dist[{i}][{i}] is nonzero"),
            MetricViolation::Asymmetric { i, j } => {
                write!(f, "dist[{i}][{j}] differs from dist[{j}][{i}]")
            }
            MetricViolation::NonpositiveOffDiagonal { i, j } => {
                write!(f, "dist[{i}][{j}] is not positive")
            }
            MetricViolation::Triangle { i, j, k } => {
                write!(f, "triangle inequality fails on ({i}, {j}, {k})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Metric axiom failure, reported through the validating constructors.
    InvalidMetric(MetricViolation),
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    /// A value vector or weight map does not match the space it is used with.
    SpaceMismatch {
        expected: usize,
        found: usize,
    },
    DiagonalPair {
        index: usize,
    },
    DuplicateCoordinate {
        index: usize,
    },
    UnsortedCoordinates {
        index: usize,
    },
    /// Function paired against a free element must vanish at the base point.
    NonzeroAtBase {
        base: usize,
    },
    NonpositiveWeight {
        detail: String,
    },
    UnbalancedTotals {
        left: String,
        right: String,
    },
    ThetaOutOfRange,
    /// Exact backend cannot represent the requested power of a distance.
    InexactPower {
        detail: String,
    },
    NotLineSpace,
    NotOneLipschitz {
        p: usize,
        q: usize,
    },
    EmptyAnchorSet,
    /// `split_overlap` called on a triple that is not metrically aligned.
    NotAligned {
        x: usize,
        y: usize,
        z: usize,
    },
    BruteForceCapExceeded {
        size: usize,
        cap: usize,
    },
    /// Consecutive chain pairs must share their linking point.
    BrokenChain {
        position: usize,
    },
    PairNotInSupport {
        x: usize,
        y: usize,
    },
    DepthCapExceeded {
        depth: u32,
        cap: u32,
    },
    GridTooSmall {
        n: usize,
    },
    Parse(String),
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMetric(v) => write!(f, "invalid metric: {v}"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "point index {index} out of range for {len} points")
            }
            Error::SpaceMismatch { expected, found } => {
                write!(
                    f,
                    "space mismatch: expected {expected} points, found {found}"
                )
            }
            Error::DiagonalPair { index } => write!(f, "diagonal pair ({index}, {index})"),
            Error::DuplicateCoordinate { index } => {
                write!(f, "duplicate line coordinate at position {index}")
            }
            Error::UnsortedCoordinates { index } => {
                write!(
                    f,
                    "line coordinates must be strictly increasing (position {index})"
                )
            }
            Error::NonzeroAtBase { base } => {
                write!(f, "function must vanish at the base point {base}")
            }
            Error::NonpositiveWeight { detail } => write!(f, "nonpositive weight: {detail}"),
            Error::UnbalancedTotals { left, right } => {
                write!(f, "unbalanced totals: {left} vs {right}")
            }
            Error::ThetaOutOfRange => write!(f, "snowflake exponent must lie in (0, 1)"),
            Error::InexactPower { detail } => {
                write!(f, "power not representable exactly: {detail}")
            }
            Error::NotLineSpace => write!(f, "operation requires a space built from line points"),
            Error::NotOneLipschitz { p, q } => {
                write!(
                    f,
                    "prescribed values exceed Lipschitz constant 1 on ({p}, {q})"
                )
            }
            Error::EmptyAnchorSet => write!(f, "extension problem needs a nonempty point set"),
            Error::NotAligned { x, y, z } => {
                write!(f, "{y} does not lie on the metric segment [{x}, {z}]")
            }
            Error::BruteForceCapExceeded { size, cap } => {
                write!(f, "{size} pairs exceed the brute-force cap of {cap}")
            }
            Error::BrokenChain { position } => {
                write!(
                    f,
                    "chain pairs {position} and {} do not share a point",
                    position + 1
                )
            }
            Error::PairNotInSupport { x, y } => {
                write!(f, "pair ({x}, {y}) is not in the support of the measure")
            }
            Error::DepthCapExceeded { depth, cap } => {
                write!(f, "depth {depth} exceeds the cap of {cap}")
            }
            Error::GridTooSmall { n } => write!(f, "grid size {n} too small"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<MetricViolation> for Error {
    fn from(v: MetricViolation) -> Self {
        Error::InvalidMetric(v)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
