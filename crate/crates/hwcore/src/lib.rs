//! Exact finite-field models of Heisenberg-Weil representations.
//!
//! The crate works without `std`; only `alloc` is required. Everything is
//! exact: finite fields through Zech logarithm tables, character values in
//! a cyclotomic field with arbitrary precision rational coordinates. The
//! only floating point code is the complex embedding used to measure
//! absolute values of Frobenius eigenvalues.
//!
//! Module map:
//! - [`ff_tower`]: one field `F_{q^D}` with all its subfields.
//! - [`cyclotomic`]: `Q(zeta_n)` arithmetic and the additive character.
//! - [`weight_datum`]: weight data, adapted bases, orbits, polarizations.
//! - [`heisenberg`]: Heisenberg groups, their Weil factors and the HW group.
//! - [`weil_reps`]: the Heisenberg representation and its Weil extension.
//! - [`exp_sums`]: Gauss sums, torsor counts and recurrence certificates.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod cyclotomic;
pub mod error;
pub mod exp_sums;
pub mod ff_tower;
pub mod heisenberg;
pub mod linalg;
pub mod poly;
pub mod weight_datum;
pub mod weil_reps;

pub use error::{Error, Result};
