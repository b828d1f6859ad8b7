//! Exact computational algebra for Hall algebras of curves over finite fields.
//!
//! The crate is `no_std` (with `alloc`). Everything is exact: coefficients
//! live in ℚ(√q) or in ℚ(v) with v² = q, and all counts come from explicit
//! enumeration over finite fields.
//!
//! Layout:
//! - [`scalar`]: coefficient field, numeric ℚ(√q) and symbolic ℚ(v).
//! - [`polyrat`]: sparse Laurent polynomials and rational functions.
//! - [`witt`]: big Witt vectors, zeta functions, L-series, kernels.
//! - [`ff`] and [`finmod`]: finite fields, torsion modules, local Hall algebras.
//! - [`cohp1`]: coherent sheaves on P¹, Hall products, Hecke operators.
//! - [`shuffle`]: shuffle algebras with rational kernels.
//! - [`verify`]: theorem-level verification suites.
#![no_std]

extern crate alloc;

mod error;
pub mod expr;
pub mod linalg;
pub mod scalar;
pub mod polyrat;
pub mod witt;
pub mod ff;
pub mod finmod;
pub mod cohp1;
pub mod shuffle;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::{Scalar, ScalarMode};
pub use polyrat::{DegreeWindow, LaurentPoly, Monomial, RationalFunction};

