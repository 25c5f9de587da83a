//! Computational universal algebraic geometry over finite algebras.
//!
//! Equation systems are closed against a finite algebra and the resulting
//! congruences of free algebras are enumerated together with their
//! coordinate algebras. On top of that sit decision procedures for
//! geometric and automorphic equivalence up to a rank bound.

pub mod algebra;
pub mod dsl;
pub mod error;
pub mod geometry;
pub mod report;
pub mod terms;
pub mod verbal;

pub use error::{Error, Result};
