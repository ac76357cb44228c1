//! Exact arithmetic for heights in arithmetic dynamics.
//!
//! The crate computes generic iterates of monic polynomials and their
//! coefficient bounds, function-field and numeric canonical heights, heights
//! of polynomials and algebraic numbers, p-adic Böttcher coordinates for
//! families of polynomials, and factorizations over Q. Everything that can be
//! exact is exact; floating point only appears for archimedean root data and
//! always comes with an explicit error bound.

pub mod bottcher;
pub mod dynamics;
pub mod error;
pub mod exact_arith;
pub mod factor_roots;
pub mod heights;
pub mod parse;
pub mod poly;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use exact_arith::{Rational, Valuation};
pub use poly::{MultiPoly, QAlgebra, Ring, TruncLaurent, UniPoly, Var};
