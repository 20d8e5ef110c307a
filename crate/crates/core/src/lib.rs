//! Pseudo-spectral workbench for the quadratic derivative nonlinear
//! Schrödinger equation
//!
//! ```text
//! i u_t + (1/2) u_xx = d_x(lambda u^2 + mu |u|^2)
//! ```
//!
//! on a periodic box standing in for the line. The crate implements the
//! gauge pipeline (derivative equation to a derivative-free cubic equation
//! and back), the parabolically regularized semigroup, the Bona-Smith
//! mollifier, Littlewood-Paley and frequency-envelope diagnostics, and the
//! conservation laws of the `2 lambda + conj(mu) = 0` case.

// `!(x > 0.0)` is used on purpose so NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod error;
pub mod evolver;
pub mod fit;
pub mod gauge;
pub mod harness;
pub mod initial_data;
pub mod littlewood_paley;
pub mod semigroup;
pub mod spectral;

pub use error::{Error, Result};
pub use gauge::Coefficients;
pub use spectral::{make_grid, Field, Grid};
