//! Numerical laboratory for homogeneous De Giorgi classes.
//!
//! The crate computes variational p-capacities of condensers, evaluates the
//! classical counterexample families (Meyers' planar solution, the cone
//! solution in 3D and the quartic sub-solution in 4D), solves divergence-form
//! elliptic problems with full coefficient matrices, and measures the
//! quantities entering Caccioppoli, weak Harnack, logarithmic and
//! Phragmén–Lindelöf growth estimates.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! verification thresholds are calibrated for.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod counterexamples;
pub mod degiorgi;
pub mod error;
pub mod geometry;
pub mod growth;
pub mod scalar;
pub mod solver;

pub use error::{LabError, Result};
pub use scalar::Scalar;

pub type UniformGrid = geometry::UniformGrid<f64>;
pub type SetMask = geometry::SetMask<f64>;
pub type ScalarField = geometry::ScalarField<f64>;
pub type GradientField = geometry::GradientField<f64>;
pub type Family = counterexamples::Family<f64>;
pub type CondenserProblem = capacity::CondenserProblem<f64>;
pub type CapacityEstimate = capacity::CapacityEstimate<f64>;
pub type DirichletProblem = solver::DirichletProblem<f64>;
pub type GrowthCurve = growth::GrowthCurve<f64>;
pub type FitResult = growth::FitResult<f64>;
pub type HarnackReport = degiorgi::HarnackReport<f64>;
pub type LogEstimateReport = degiorgi::LogEstimateReport<f64>;
