//! Numerical laboratory for the weighted semilinear heat equation
//!
//! ```text
//! u_t - div(w(x) grad u) = sum_i h_i(t) f_i(u),   u(0) = u0 >= 0,
//! ```
//!
//! with power weights `w(x) = |x_1|^a` or `w(x) = |x|^b`.
//!
//! The crate is organised bottom-up:
//!
//! - [`weight`]: the weights and their kernel scale function `h_x(r)`.
//! - [`semigroup`]: a conservative finite-volume discretization of the linear
//!   flow and the semigroup `S(t)` built on it.
//! - [`dynamics`]: IMEX integration of the mild formulation, blow-up
//!   detection, monotone (Picard) iterates and order comparison.
//! - [`criteria`]: Osgood tails, the global-existence smallness index,
//!   blow-up certificates, the critical exponents and decay fits.
//! - [`lab`]: JSON configuration, point classification, parameter sweeps and
//!   the CSV/SVG writers behind the `degheat` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod lab;
pub mod quad;
pub mod semigroup;
pub mod tridiag;
pub mod weight;

pub use error::{Error, Result};
