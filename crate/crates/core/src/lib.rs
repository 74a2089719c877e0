//! Exact-arithmetic engine for a family of weighted double Hurwitz numbers.
//!
//! Two independent computational routes are implemented and cross-checked:
//! a hypergeometric tau-function expansion over partitions (`tau`) and closed
//! spectral-curve correlator formulas (`correlators`). On top of those sit a
//! formal tautological-ring engine with forgetful pushforwards (`tautring`),
//! the coefficient series and intersection-number extraction for an ELSV-type
//! identity (`elsv`), and symbolic verification of the analytic structure of
//! the correlators (`logproj`).
//!
//! Everything is exact: arbitrary-precision rationals, truncated formal power
//! and Laurent series, and multivariate rational functions with factored
//! denominators. No floating point anywhere.

pub mod error;
pub mod rational;
pub mod poly;
pub mod ratfun;
pub mod series;
pub mod laurent;
pub mod sop;
pub mod partition;
pub mod pseries;
pub mod schur;
pub mod tau;
pub mod curve;
pub mod correlators;
pub mod tautring;

pub use error::{Error, Result};
pub use rational::Rat;
