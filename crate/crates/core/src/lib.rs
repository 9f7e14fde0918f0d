//! Geometric functionals on log-concave functions `f = e^{-u}` where `u` is a
//! piecewise-linear, coercive convex function, together with a small
//! "valuation lab" that checks valuation and covariance identities for
//! black-box functionals and recovers their classification constants.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! report serialization live in the companion `lcval` crate.
//!
//! Layout:
//! - [`polytope`]: V-represented convex polytopes in dimension 2..=4 (hulls,
//!   support functions, Minkowski sums, volume, moment vectors, clipping,
//!   Hausdorff distance).
//! - [`convex_fn`]: max-of-affine convex functions on polyhedral domains.
//! - [`log_concave`]: the `e^{-u}` layer with exact scaling and powers.
//! - [`functionals`]: layer-cake integrals (volume, level set body, moment
//!   vector) and their closed forms on cone functions.
//! - [`lab`]: axiom checkers, classifiers, limit experiments.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod convex_fn;
mod error;
pub mod functionals;
pub mod lab;
pub mod linalg;
pub mod log_concave;
pub mod lp;
pub mod polytope;
pub mod quadrature;
mod vector;

pub use convex_fn::{AffinePiece, ConeBound, Coercivity, Domain, MinOutcome, PLConvexFunction};
pub use error::{Error, Result};
pub use functionals::{QuadratureConfig, SupportEvaluator, TailBound};
pub use log_concave::{LogConcaveFunction, MaxOutcome};
pub use polytope::{HalfSpace, Polytope};
pub use vector::{LinearMap, Vector, MAX_DIM};

/// Geometric tolerance shared by extremeness, coplanarity and membership
/// predicates.
pub const EPS_GEO: f64 = 1e-9;

/// Dimensions accepted for user-facing geometry.
pub const MIN_USER_DIM: usize = 2;
pub const MAX_USER_DIM: usize = 4;

pub(crate) fn check_user_dim(n: usize) -> Result<()> {
    if (MIN_USER_DIM..=MAX_USER_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}
