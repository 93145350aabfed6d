//! Exact and numerical machinery for experiments on Fourier and Poisson
//! limits at non-random points: rational interval unions, kernels,
//! trigonometric polynomials, effective null covers and the explicit
//! counterexample constructions built on them.

pub mod counterexamples;
pub mod error;
pub mod exact;
pub mod functions;
pub mod interval_sets;
pub mod kernels;
pub mod poisson;
pub mod quadrature;
pub mod randomness_tests;
pub mod trig;
pub mod verify;

pub use error::{Error, Result};
pub use exact::Rational;
pub use functions::{BoundaryData, BoundaryFunction, PiecewiseLinear, StepFunction};
pub use interval_sets::{RationalInterval, RationalIntervalUnion};
pub use randomness_tests::{TestFamily, TestKind};
pub use trig::TrigPoly;
