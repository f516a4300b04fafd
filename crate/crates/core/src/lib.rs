//! Numerical toolkit for the one-dimensional p-Laplacian boundary value system
//!
//! ```text
//! (q(t) phi(p(t) u_i'(t)))' + f_i(t, u) = 0,   0 < t < 1,  i = 1..n,
//! u(0) = u(1) = 0,
//! ```
//!
//! with `phi(x) = |x|^(p-2) x`, `p > 1`, and positive continuous weights
//! `p(t)`, `q(t)` (`q` nondecreasing). Positive solutions are computed as
//! fixed points of a constructive integral operator that maps a cone of
//! functions with a Harnack-type lower bound into itself.
//!
//! The crate is organised around that construction:
//!
//! - [`expr`]: a small arithmetic expression language for user-defined
//!   coefficients `p(t)`, `q(t)` and nonlinearities.
//! - [`problem`]: problem descriptions, sampled hypothesis validation,
//!   lambda scaling, and the radial annulus-to-interval reduction.
//! - [`quadrature`]: composite 5-point Gauss-Legendre panels, cumulative
//!   integral tables, and grid-sampled functions.
//! - [`cone`]: the cone constant `rho`, Harnack floor profiles, and cone
//!   membership checks.
//! - [`operator`]: `phi`, its inverse, the peak-location equation, and the
//!   integral operator `T` itself.
//! - [`solver`]: damped Picard iteration with a Newton-on-grid fallback,
//!   plus solution verification (residuals, boundary data, cone margins,
//!   norm sandwich).
//! - [`analysis`]: the window functional `gamma`, the constants `A_i`/`B_i`,
//!   asymptotic ratio estimation, explicit eigenvalue intervals, and the
//!   growth/bound hypothesis checks behind them.

// Guards written as `!(x > 0)` are deliberate: they reject NaN along with
// the out-of-range values, which `x <= 0` would let through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cone;
pub mod error;
pub mod expr;
pub mod operator;
pub mod problem;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};

/// Master grid resolution used when a caller does not specify one.
pub const DEFAULT_GRID_N: usize = 512;
