use serde::{Deserialize, Serialize};

use super::lyapunov::{lyapunov, young_formula, LyapunovEstimate, LyapunovMethod};
use super::maps::{iterate, SmoothMap};
use crate::error::Result;
use crate::estimate::{
    box_dimension, grid_pointwise_dimension, information_dimension, DimensionReport, PointCloud, ScaleLadder,
};

/// Number of evenly spaced orbit points used as pointwise references.
pub const REFERENCE_POINTS: usize = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactDimensionReport {
    pub map: SmoothMap,
    pub seed: u64,
    pub start: [f64; 2],
    pub n_orbit: usize,
    pub entropy_nats: f64,
    pub lyapunov: LyapunovEstimate,
    pub predicted: f64,
    pub box_dim: DimensionReport,
    pub information: DimensionReport,
    pub pointwise: DimensionReport,
    /// Dimension of the marginal along the unstable direction.
    pub d_u: DimensionReport,
    /// Dimension of the marginal along the stable direction.
    pub d_s: DimensionReport,
    /// `|pointwise - (d_s + d_u)|`.
    pub decomposition_error: f64,
    /// Largest `|estimate - predicted|` over box, information and pointwise.
    pub max_deviation: f64,
    /// Information dimension shift when every other orbit point is dropped.
    pub subsample_drift: f64,
}

impl ExactDimensionReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_deviation < tol && self.decomposition_error < tol
    }
}

/// Estimates the dimension of a seeded orbit cloud every available way and
/// compares the results with the surface formula.
pub fn verify_exact_dimension(
    map: &SmoothMap,
    n_orbit: usize,
    seed: u64,
    ladder: &ScaleLadder,
) -> Result<ExactDimensionReport> {
    let start = map.random_start(seed);
    let orbit = iterate(map, start, n_orbit, seed)?;
    let lam = lyapunov(map, &orbit, LyapunovMethod::ClosedForm)?;
    let h = map.entropy();
    let predicted = young_formula(h, &lam)?;

    let box_dim = box_dimension(&orbit, ladder)?;
    let information = information_dimension(&orbit, ladder)?;
    let step = (n_orbit / REFERENCE_POINTS).max(1);
    let references: Vec<usize> = (0..n_orbit).step_by(step).take(REFERENCE_POINTS).collect();
    let pointwise = grid_pointwise_dimension(&orbit, ladder, &references)?;

    let (u, s) = map.directions();
    let d_u = information_dimension(&orbit.project(&u)?, ladder)?;
    let d_s = information_dimension(&orbit.project(&s)?, ladder)?;

    let half = every_other(&orbit)?;
    let subsample_drift = (information_dimension(&half, ladder)?.slope - information.slope).abs();

    let max_deviation =
        [&box_dim, &information, &pointwise].iter().map(|r| (r.slope - predicted).abs()).fold(0.0, f64::max);
    Ok(ExactDimensionReport {
        map: map.clone(),
        seed,
        start,
        n_orbit,
        entropy_nats: h.nats(),
        lyapunov: lam,
        predicted,
        decomposition_error: (pointwise.slope - (d_s.slope + d_u.slope)).abs(),
        box_dim,
        information,
        pointwise,
        d_u,
        d_s,
        max_deviation,
        subsample_drift,
    })
}

fn every_other(cloud: &PointCloud) -> Result<PointCloud> {
    let coords = (0..cloud.len()).step_by(2).flat_map(|i| cloud.point(i).to_vec()).collect();
    PointCloud::new(cloud.dimension(), coords, None)
}
