//! Monoid families, elements, abelian targets and actions.

mod action;
mod element;
pub mod json;
mod monoid;
mod quotient;
mod target;

pub use action::{ActionSpec, EndoMatrix, EndoPower};
pub use element::Element;
pub use monoid::{Family, MonoidCtx};
pub use quotient::QuotientSpec;
pub use target::{AbelianTarget, Kernel, TargetElem};

pub(crate) use element::fmt_rational;
