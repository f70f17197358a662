//! Explicit entropy solutions of the Riemann problem for
//! `u_t + v(u)u_x − t(a²(u)u_x)_x = 0` with piecewise-constant `v` and `a`.
//!
//! The solution is self-similar, `u = u(x/t)`, and is determined by the
//! discontinuity speeds `ξ_1 ≤ … ≤ ξ_d`. Those speeds are the unique minimizer
//! of a strictly convex entropy function over an ordered cone. The crate
//! computes that minimizer ([`optimizer`]), rebuilds the profile
//! ([`profile`]), certifies it through the jump conditions ([`verifier`]), and
//! cross-checks it against a finite-volume solver ([`fd_oracle`]).

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod entropy;
pub mod error;
pub mod fd_oracle;
pub mod model;
pub mod optimizer;
pub mod profile;
pub mod stats;
pub mod tridiag;
pub mod verifier;

pub use entropy::SpeedVector;
pub use error::{Error, Result};
pub use fd_oracle::{compare, solve_fd, FdParams, FdSolution};
pub use model::{validate, FluxFunctions, PiecewiseProblem, ValidatedProblem};
pub use optimizer::{
    initial_point, kkt_check, minimize, KktReport, Method, MinimizeOptions, Minimum,
};
pub use profile::SelfSimilarProfile;
pub use verifier::{default_tolerance, verify, VerificationReport};
