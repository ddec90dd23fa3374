//! Monotile certificates, tiling sequences and congruentization.

mod auto;
mod cert;
mod congruent;
mod dlx;
mod sequence;

pub use auto::{
    automorphism_monotile_check, phi_q_level_cert, phi_q_translates, word_monotile_cert, AutoRow, Automorphism,
    WordCert,
};
pub use cert::{
    all_monotile_covers, compose_certs, compose_prog_certs, find_monotile_cover, find_monotile_cover_with,
    monotile_candidates, progression_cover, ProgTileCert, TileCert, DEFAULT_TILE_BUDGET,
};
pub use congruent::{congruentize, CongruentLevel, Congruentized};
pub use dlx::{ExactCover, SearchStats};
pub use sequence::{
    extract_tiling_sequence, find_translate_into, prefix_monotile, LevelCert, LevelTiling, LocalTilingCert,
    PrefixCert,
};
