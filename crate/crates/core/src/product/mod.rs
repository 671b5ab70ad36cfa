//! Γ-sets, rectangle classes and the almost-product structure of cylinder
//! measures.
//!
//! The shift plays the role of the diffeomorphism, the 1-cylinder partition
//! the role of the partition `P`, one-sided cylinders the role of local
//! stable and unstable leaves, and `β^{-n}` the role of `e^{-n}`.

mod census;
mod defect;
mod gamma;
mod lemmas;
mod pool;

pub use census::{ball_level, build_qn, classes_and_counts, CensusCounts, CensusIndex, Levels, RectangleCensus};
pub use defect::{product_defect, verify_main_inequality, MainInequalityReport, ProductDefectRecord};
pub use gamma::{
    build_gamma, build_gamma_hat, check_gamma_membership, partition_block, BoundFamily, BoundViolation, DensityLevels,
    GammaParams, GammaSet, MIN_DENSITY_SUPPORT,
};
pub use lemmas::{check_counting_lemmas, one_sided_gamma_mass, LemmaOutcome, LemmaReport, MarginRow, Witness};
pub use pool::{PoolMode, WordPool, MAX_EXHAUSTIVE_WORDS};
