//! Singular conformal metrics `e^ρ|dz|²` on planar domains: lengths, areas,
//! curvature measures, and numerical checks of the Huber and Alexandrov
//! isoperimetric inequalities together with their equality cases.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases at the
//! crate root fix `f64`.

// `!(x > 0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod curvature;
pub mod domain;
pub mod error;
pub mod iso;
pub mod measure;
pub mod metric;
pub mod poly;
pub mod quad;
pub mod rearrange;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Loc, Point, Real};

pub type Point64 = scalar::Point<f64>;
pub type Measure = measure::SignedAtomicMeasure<f64>;
pub type Metric = metric::MetricSpec<f64>;
pub type Domain = domain::PlanarDomain<f64>;
pub type Curvature = curvature::CurvatureDecomposition<f64>;
pub type Density = curvature::Density<f64>;
pub type Quad = quad::QuadResult<f64>;
pub type IsoReport = iso::IsoReport<f64>;
pub type SharpFit = iso::SharpFit<f64>;
pub type RadialProfile = rearrange::RadialProfile<f64>;
pub type RearrangementData = rearrange::RearrangementData<f64>;
