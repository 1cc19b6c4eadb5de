//! Numerical checks for sufficient conditions of strong close-to-convexity.
//!
//! Functions on the unit disk are truncated power series
//! ([`AnalyticSeries`]). For a pair `(f, g)` the crate builds
//! `w = (z f'/g)^{1/mu} - 1` (or the reciprocal ratio), the logarithmic
//! derivative combinations that relate `f`, `g` and `w`, and evaluates the
//! five hypothesis/conclusion pairs over disk grids ([`theorem::check`]).
//! [`jack`] probes maximum-modulus points on circles, and [`families`]
//! generates starlike references and synthesizes `f` from a chosen `w`.
//!
//! The crate is `no_std` and needs only `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod families;
pub mod function;
pub mod functionals;
pub mod jack;
pub mod series;
pub mod theorem;

pub use error::{CoreError, Result};
pub use function::NormalizedFunction;
pub use functionals::{Direction, FunctionPair};
pub use jack::{JackReport, R_MAX};
pub use num_complex::Complex64;
pub use series::{AnalyticSeries, EvalResult, DEFAULT_ORDER};
pub use theorem::{DiskGrid, TheoremId, TheoremParams, Verdict};
