//! Numerical calculus of sharp integral inequalities for analytic functions on
//! the unit polydisc.
//!
//! The crate is organised bottom-up:
//!
//! * [`series`] truncated multivariate power series, Pochhammer symbols and
//!   the reproducing kernels `Π (1 - z_j conj(w_j))^(-q_j)`;
//! * [`quadrature`] tensor rules for the Haar measure on the torus and the
//!   normalized weighted area measures on the polydisc, plus Hardy norms;
//! * [`norms`] generalized Hardy norms by coefficients and by integration,
//!   restricted norms and the pointwise growth bound;
//! * [`factorization`] one-variable Blaschke/outer machinery;
//! * [`inequalities`] the gap harness producing [`GapReport`]s;
//! * [`search`] derivative-free ratio maximization over function families;
//! * [`report`] run configuration, seeded random functions and JSON reports.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod factorization;
pub mod inequalities;
pub mod json;
pub mod norms;
pub mod quadrature;
pub mod report;
pub mod search;
pub mod series;

pub use error::{Error, Result};
pub use inequalities::{GapReport, InequalityId, Verdict};
pub use num_complex::Complex64;
pub use quadrature::{DiscRule, QuadratureConfig, TorusRule};
pub use series::{MultiIndex, PolySeries, WeightVector};
