//! Checkers for Hlawka-type inequalities: the one-form/two-form relation,
//! quadratic forms and the Minkowski cone, sub/superadditive functions on
//! semigroups, and discrete-measure integral versions.

// symmetric-matrix code reads better with explicit (i, j) indices
#![allow(clippy::needless_range_loop)]

pub mod campaign;
pub mod error;
pub mod generators;
pub mod instance;
pub mod integral;
pub mod numerics;
pub mod quadratic;
pub mod relation;
pub mod sampling;
pub mod semigroup;

pub use error::{Error, Result};
pub use numerics::{cmp_eq, cmp_ge, Scalar, TolerancePolicy, Verdict};
