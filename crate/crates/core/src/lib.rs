//! Finite-n edge statistics of the Gaussian Unitary Ensemble.
//!
//! At finite `n` the law of the largest eigenvalue is a Fredholm determinant
//! of the Hermite kernel, also available through the `q_n p_n` integral
//! representation ([`hermite_n`]). In the edge-scaling limit it becomes the
//! Tracy–Widom law `F_2`, computed from the Airy kernel ([`airy_ops`]) and
//! from the Hastings–McLeod solution of Painlevé II ([`painleve2`]).
//! [`edgeworth`] holds the expansion in powers of `n^{-1/3}` between the two
//! and [`gue_mc`] samples `λ_max` directly. [`verify`] runs the cross-checks.
//!
//! [`quad`] holds the Nyström machinery every kernel shares and [`specfun`]
//! the scalar special functions.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airy_ops;
pub mod edgeworth;
pub mod error;
pub mod fit;
pub mod gue_mc;
pub mod hermite_n;
pub mod painleve2;
pub mod quad;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};
