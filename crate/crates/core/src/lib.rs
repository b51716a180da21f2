//! Pointwise numerical geometry for Cauchy data deformations of the form
//! `gbar = g + phi^2 df^2`, together with the supporting machinery: jets of
//! scalar and tensor fields, curvature operators on a 3-dimensional chart,
//! constraint quantities, static-spacetime curvature, exact Schwarzschild
//! models in three charts, and spherically symmetric flow solvers.
//!
//! Core math is generic over the scalar type through [`real::Real`]
//! (`f32`/`f64`); the aliases below fix `f64`, which is what the shipped
//! tolerances assume.

pub mod constraints;
pub mod curvature;
pub mod error;
pub mod fields;
pub mod jang;
pub mod jet;
pub mod real;
pub mod schwarzschild;
pub mod static_spacetime;
pub mod surface;

pub use error::{Error, Result};
pub use real::Real;

/// `f64` instantiations of the core types.
pub type Point = jet::Point3<f64>;
pub type Jet = jet::ScalarJet<f64>;
pub type Sym2 = fields::Sym2Jet<f64>;
pub type Scalar = fields::AnalyticScalar<f64>;
pub type Tensor = fields::AnalyticSym2<f64>;
pub mod linalg;
