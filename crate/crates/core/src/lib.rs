//! Numerical laboratory for the ζ-factorization on the critical line.
//!
//! The crate is layered bottom-up:
//!
//! * [`special_fn`]: θ(t), the Riemann-Siegel Z(t) and an Euler–Maclaurin
//!   ζ(1/2 + it) oracle.
//! * [`quadrature`]: oscillation-aware Gauss–Kronrod panels over Z and Z²,
//!   the Hardy–Littlewood moment and a checkpointed cumulative second moment.
//! * [`ladder`]: the Jacob's ladder φ₁ obtained by inverting the almost-exact
//!   second-moment expression, its inverse, prime counting and calibration
//!   of the additive constant c₀.
//! * [`factorization`]: the mean-value point η, the α-sequence and the
//!   factorization report.

pub mod error;
pub mod factorization;
pub mod ladder;
pub mod quadrature;
pub mod roots;
pub mod special_fn;
pub mod sum;

pub use error::{Error, Result};
