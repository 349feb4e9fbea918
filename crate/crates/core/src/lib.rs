//! Symbolic-numeric toolkit for KAM-type normal forms near elliptic
//! equilibria: small-divisor arithmetic, truncated power-series Poisson
//! calculus, Birkhoff normalization, a Newton-type iteration with Hadamard
//! quasi-inverses, and numerical checks of invariant-torus density.

pub mod arithmetic;
pub mod birkhoff;
pub mod jets;
pub mod kamengine;
pub mod linalg;
pub mod poisson;
pub mod scalednorms;
pub mod scalar;
pub mod torusverify;

pub use jets::{Jet, MultiIndex, Shape};
pub use scalar::{CQSqrt5, ComplexScalar, QSqrt5, RealScalar, Scalar};
