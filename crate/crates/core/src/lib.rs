//! Exact distance-geometry kernel for unit-distance preserving maps of the
//! plane.
//!
//! The crate is `no_std` (it needs `alloc`). Everything is exact: rationals,
//! iterated quadratic extensions of ℚ with a real embedding, and rational
//! functions in one indeterminate over such a tower.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cm;
pub mod engine;
pub mod gadgets;
pub mod models;
pub mod poly;
pub mod relations;
pub mod scalars;

pub use cm::Point;
pub use scalars::{Field, FunElem, Rational, Ring, Scalar, ScalarError, Tower, TowerElem};
