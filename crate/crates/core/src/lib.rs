//! Numerics for nodal intersections of Laplace eigenfunctions on the flat torus
//! `R^2 / 2πZ^2` with curved arcs.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. The companion
//! `toral-nodal` crate carries the command-line driver and the file formats.
//!
//! Module map:
//!
//! * [`lattice`]: lattice points on `x^2 + y^2 = n`, arc windows, `B_λ` and the
//!   short-arc audits.
//! * [`medians`]: the median map with exact doubled coordinates, its inverse,
//!   dyadic shells and the separation estimates.
//! * [`curve`]: unit-speed curves with positive curvature and their phase
//!   functions.
//! * [`wavefield`]: eigenfunctions, their restrictions to curves, the cutoff
//!   split `f = f0 + f1`, the bilinear sum `H` and the median expansion of `f^2`.
//! * [`oscillatory`]: quadrature, oscillatory integrals, restriction norms and
//!   the Schur-test machinery.
//! * [`nodal`]: certified sign-change counting, partitions of unity and the
//!   theorem-ratio harness.
//! * [`exceptions`]: geodesic counterexamples and zonal harmonics on the sphere.
#![no_std]
// f64 methods come from `num_traits::Float` without std. Whenever std is in
// the build graph its inherent methods win, so those imports are marked
// `allow(unused_imports)`.
// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod curve;
pub mod error;
pub mod exceptions;
pub mod lattice;
pub mod medians;
pub mod nodal;
pub mod oscillatory;
pub mod quad;
pub mod rng;
pub mod wavefield;

pub use error::{Error, Result};
