//! Følner sequences: builders, defects and canonical re-indexing.

mod aseq;
mod builders;
mod cif;
mod exhaustion;
mod progression;
mod seq;

pub use aseq::{ASeqTerms, ASequence, ASEQ_CHECK_BOUND};
pub use builders::{aseq_from_json, aseq_to_json, build_folner, BuilderSpec};
pub use cif::{
    cif_extract, defect, folner_report, rational_digits, CifIndices, DefectRow, DefectTrend, FolnerReport,
    RationalDigits,
};
pub use exhaustion::Exhaustion;
pub use progression::RatProgression;
pub use seq::{Flags, FolnerSeq, Provenance, DEFAULT_SIZE_CAP};
