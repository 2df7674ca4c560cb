//! Spectral identities for the discrete Schrödinger operator on the rooted
//! binary half-tree (every vertex has two children, so all vertices except
//! the root have degree 3), plus a finite-matrix laboratory for
//! block-operator contour decompositions.
//!
//! The crate is `no_std` with `alloc`; disable the default `std` feature to
//! build it that way. Everything here is a pure function of its inputs.
//!
//! Layout:
//!
//! - [`tree`]: vertex addresses, potentials, weighted ℓ² norms, truncation,
//!   and dense finite-tree matrices used as oracles.
//! - [`green`]: the m-function recursion `m = -1/(m₁ + m₂ - V(O) + λ)`,
//!   boundary densities, large-λ coefficients, and the radial Jacobi oracle.
//! - [`disk`]: the map `λ = √2(z + 1/z)` to the unit disk, zero/pole search,
//!   Blaschke products, and the multiplicative representation of `f`.
//! - [`sum_rules`]: band quadrature and the assembled sum rules,
//!   inequalities, and relative-entropy bound.
//! - [`block`]: block operators, resolvent contour integrals, and the strip
//!   operator's mode-coupling matrix.

#![cfg_attr(not(feature = "std"), no_std)]

// `!(x > 0.0)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod block;
pub mod disk;
mod error;
pub mod green;
pub mod quad;
pub mod sum_rules;
pub mod tree;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// `2√2`, the right edge of the free band.
pub const BAND_EDGE: f64 = 2.0 * core::f64::consts::SQRT_2;

// Float methods on f64 come from libm when std is absent.
#[allow(unused_imports)]
pub(crate) mod prelude {
    #[cfg(not(feature = "std"))]
    pub use num_traits::Float;
}
