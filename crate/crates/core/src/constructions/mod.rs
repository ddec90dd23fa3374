//! Følner sequences and tilings of groups assembled from smaller pieces:
//! extensions, finite-index overgroups and increasing unions.

mod diagonal;
mod extension;
mod section;

pub use diagonal::{diagonal_folner, DefectCheck, Diagonal, DiagonalChain};
pub use extension::{
    extension_folner, extension_monotileable, finite_index_folner, tile_kernel_set, Bump, Condition, ConjugateRow,
    ExtensionLevel, ExtensionLevelCert, ExtensionOptions, ExtensionTrace, HSet, MonotileableExtension, RowKind,
};
pub use section::{associated_section, lift_tiling, lifted_translates_json, SectionTable};
