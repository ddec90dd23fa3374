//! Trajectories, entropy profiles along Følner sequences and the additivity
//! check for invariant subgroups.

mod profile;
mod subgroup;
mod trajectory;

pub use profile::{
    addition_report, entropy_profile, entropy_profile_with, log_ratio_le, relative_count, relative_profile,
    AdditionCase, AdditionReport, AdditionRow, EntropyProfile, ProfileRow, EXACT_EXPONENT_LIMIT, FLOAT_RTOL,
};
pub use subgroup::{induced_actions, witness_subset, Induced, SubgroupSpec, Witness};
pub use trajectory::{
    is_subgroup, trajectory, trajectory_size, trajectory_size_with, trajectory_with, DEFAULT_TRAJECTORY_CAP,
};
