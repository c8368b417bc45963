//! Risk functionals and decision-theoretic lower bounds for confidence
//! intervals centred on the ideal bootstrap smoothed estimator in the
//! two-nested-regression-models testbed with known error variance.
//!
//! The crate is organised bottom-up:
//!
//! - [`normal`]: standard normal density, distribution function and `z(a)`.
//! - [`roots`], [`quadrature`]: Brent root finding and composite
//!   Gauss-Legendre quadrature.
//! - [`smoothing`]: `k`, `q`, `r_delta`, `b` and [`ProblemConfig`].
//! - [`risk`]: coverage and scaled expected length of `CI(s)`.
//! - [`bound`]: the pointwise minimiser `s(gamma, nu)`, `g~`, the lower
//!   bound `LB(u)`, `u**` and gain/loss.
//! - [`optimizer`]: maximisation of `LB(u)` over the two discrete priors.
//! - [`mc`]: a Monte-Carlo oracle for coverage and SEL.

pub mod bound;
pub mod error;
pub mod mc;
pub mod normal;
pub mod optimizer;
pub mod quadrature;
pub mod risk;
pub mod roots;
pub mod simplex;
pub mod smoothing;

pub use error::{Error, Result};
pub use smoothing::ProblemConfig;
