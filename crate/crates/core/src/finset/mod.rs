//! Finite subsets, sum sets and the covering number calculus.

mod aset;
mod cover;
mod logval;
mod subset;

pub use aset::{minkowski_sum, AFinSet};
pub use cover::{
    covering_number, covering_number_with, ell, ell_rel, strong_disjoint_check, CoverCert,
    DEFAULT_COVER_BUDGET,
};
pub use logval::{ln_big, LogValue};
pub use subset::FinSubset;
