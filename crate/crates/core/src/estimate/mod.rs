//! Dimension estimators: symbolic cylinder regressions, grid-based box and
//! information dimensions, the cross-estimator coincidence check and the
//! pointwise-dimension histogram for non-ergodic mixtures.

mod coincidence;
mod grid;
mod histogram;
mod ladder;
mod regress;
mod report;
mod symbolic;

pub use coincidence::{coincidence_check, CoincidenceVerdict};
pub use grid::{
    box_dimension, box_dimension_anchored, grid_pointwise_dimension, information_dimension,
    information_dimension_anchored, rescale, GridAnchor, PointCloud, MAX_DIMENSION,
};
pub use histogram::{histogram, pointwise_dim_histogram, Cluster, Histogram, MIN_CLUSTER_MASS};
pub use ladder::{level_log_scale, ScaleLadder, MIN_WINDOW};
pub use regress::{bracketed, interquartile_range, least_squares, secant_slopes, BracketedFit, LineFit};
pub use report::DimensionReport;
pub use symbolic::{
    pointwise_dimension_sampled, pointwise_dimension_symbolic, stable_unstable_dimensions, symbolic_ball_measure,
};
