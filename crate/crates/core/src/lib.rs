//! Kernel algebra for integral operators on `L_p` spaces and numerical
//! verification of covariance commutation relations `AB = B F(A)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`domain_sets`]: finite unions of intervals, ordered partitions and the
//!   almost-everywhere zero test.
//! * [`func_expr`]: a small expression language for kernels and multipliers.
//! * [`quadrature`]: panel-aligned Gauss–Legendre grids and grid functions.
//! * [`kernels`]: analytic and sampled kernels, composition, iteration and
//!   polynomial kernels.
//! * [`operators`]: integral operators, their action and the test battery.
//! * [`covariance`]: region-wise kernel conditions for `AB = B F(A)`.
//! * [`convolution`]: convolution operators on the line and their transform
//!   domain checks.
//! * [`volterra`]: Volterra operators with separable and general kernels.
//! * [`config`], [`report`], [`fixtures`]: JSON input, reports and the
//!   built-in scenarios used by the command-line tool.

pub mod config;
pub mod convolution;
pub mod covariance;
pub mod domain_sets;
mod error;
pub mod fixtures;
pub mod func_expr;
pub mod kernels;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod volterra;

pub use error::{Error, Result};
