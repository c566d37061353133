//! Computations in Lipschitz-free spaces over finite metric spaces:
//! free norms via transport duality, optimal discrete de Leeuw
//! representations with cyclical-monotonicity certificates, McShane
//! extension analysis, extreme-point tests, and real-line constructions.
//!
//! Every solver path is backed by an independent oracle: the exact
//! real-line norm for the transport solver, exhaustive cycle enumeration
//! for the monotonicity certifier, and closed forms for the line
//! constructions.

#![forbid(unsafe_code)]

pub mod error;
pub mod extension;
pub mod extremal;
pub mod free;
pub mod harness;
pub mod json;
pub mod line_lab;
pub mod metric;
pub mod monotonicity;
pub mod num;
pub mod transport;

pub use error::{Error, MetricViolation, Result};
pub use extension::ExtensionProblem;
pub use free::{Coupling, DeLeeuwMeasure, FreeElement, LipschitzFunction, PointMeasure};
pub use metric::{FiniteMetricSpace, SegmentSet};
pub use monotonicity::MonotonicityCertificate;
pub use num::{Rat, Scalar};
pub use transport::TransportSolution;
