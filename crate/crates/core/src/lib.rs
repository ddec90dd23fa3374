//! Følner sequences, monotile certificates and algebraic entropy for concrete
//! countable monoids.
//!
//! Everything here is exact: elements use arbitrary-precision integers and
//! rationals, covering numbers and tilings are decided by complete searches,
//! and entropy values keep the integer cardinalities they were computed from.

pub mod algebra;
pub mod constructions;
pub mod entropy;
pub mod error;
pub mod finset;
pub mod folner;
pub mod tiling;

pub use algebra::{AbelianTarget, ActionSpec, Element, Family, MonoidCtx, QuotientSpec, TargetElem};
pub use error::{Error, Result};
