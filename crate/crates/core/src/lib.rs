//! Desk-scale numerical toolkit around transfer matrices for one-dimensional
//! operators with complex, nearly periodic coefficients.
//!
//! The crate has two halves. The discrete half ([`jacobi`], fed by
//! [`quasiperiodic`]) propagates solutions of the three-term difference
//! equation of a doubly infinite tridiagonal operator, measures how far the
//! coefficients are from periodic at a list of trial periods, and turns the
//! measured decay rate into a disk around the origin that is certified free of
//! eigenvalues. The continuum half ([`sturm`]) does the same for
//! `-(a u')' + u μ` where `μ` is a local measure modeled as atoms plus a
//! piecewise-constant density, so every propagator and every norm is available
//! in closed form. [`gronwall`] holds the two comparison inequalities both
//! halves lean on, and [`mat2c`] the 2x2 complex matrix kernel.

// negated comparisons are deliberate throughout: `!(x >= 0.0)` also rejects
// NaN, which the suggested `x < 0.0` would let through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gronwall;
pub mod jacobi;
pub mod mat2c;
pub mod piecewise;
pub mod quasiperiodic;
pub mod sturm;

pub use error::{CoreError, Result};
pub use mat2c::Mat2C;
