//! Finite-volume solvers for nonlinear sorption-transport equations
//!
//! ```text
//! ∂t F(u) + ∇·(v u) = 0,    F(u) = u + a·u^p,
//! ```
//!
//! with explicit and implicit first-order upwind schemes, a compact implicit
//! second-order scheme and its high-resolution (WENO-weighted, limited)
//! form in 1D and 2D. Implicit systems are solved cell by cell with fast
//! sweeping.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod config;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod field;
pub mod grid;
pub mod isotherm;
pub mod limiter;
pub mod output;
pub mod quadrature;
pub mod scheme;
pub mod setup;
pub mod solver1d;
pub mod solver2d;
pub mod velocity;

pub use error::{Result, SolverError};
