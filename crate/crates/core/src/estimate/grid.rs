//! Grid-based box-counting, information and pointwise dimensions of point clouds.

use serde::{Deserialize, Serialize};

use super::ladder::ScaleLadder;
use super::report::DimensionReport;
use super::symbolic::merge;
use crate::error::{Error, Result};
use crate::par;

/// Largest ambient dimension; cell keys pack 32 bits per axis into a `u128`.
pub const MAX_DIMENSION: usize = 4;

/// Coordinates within this many ulps (of the cell index) below a grid line go
/// to the cell on the right, so that rounding in `x / ε` cannot split exact
/// lattice points. Kept tight: measures with mass right under grid lines
/// (Cantor sets) would otherwise gain spurious cells.
const SNAP_ULPS: f64 = 16.0;

/// A finite point set in `R^D`, optionally carrying probability weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    dimension: usize,
    coords: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl PointCloud {
    /// `coords` is row-major: point `i` occupies `coords[i*D..(i+1)*D]`.
    pub fn new(dimension: usize, coords: Vec<f64>, weights: Option<Vec<f64>>) -> Result<Self> {
        if dimension == 0 || dimension > MAX_DIMENSION {
            return Err(Error::param("dimension", format!("must be in 1..={MAX_DIMENSION}, got {dimension}")));
        }
        if !coords.len().is_multiple_of(dimension) {
            return Err(Error::param("points", "coordinate count is not a multiple of the dimension"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("points", "all coordinates must be finite"));
        }
        if let Some(w) = &weights {
            if w.len() != coords.len() / dimension {
                return Err(Error::param("weights", "one weight per point"));
            }
            if w.iter().any(|&x| !(x >= 0.0)) {
                return Err(Error::param("weights", "weights must be nonnegative"));
            }
            let s: f64 = w.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::param("weights", format!("weights must sum to 1, got {s}")));
            }
        }
        Ok(PointCloud { dimension, coords, weights })
    }

    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let d = points.first().map_or(1, Vec::len);
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::param("points", "points have differing dimensions"));
        }
        Self::new(d, points.concat(), None)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Weight of point `i` (uniform when the cloud carries none).
    pub fn weight(&self, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[i],
            None => 1.0 / self.len() as f64,
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        self.weights = Some(weights);
        Self::new(self.dimension, self.coords, self.weights)
    }

    /// Projection onto the unit vector `dir`, as a 1-dimensional cloud.
    pub fn project(&self, dir: &[f64]) -> Result<Self> {
        if dir.len() != self.dimension {
            return Err(Error::param("dir", "direction has the wrong dimension"));
        }
        let coords = (0..self.len()).map(|i| self.point(i).iter().zip(dir).map(|(a, b)| a * b).sum()).collect();
        Self::new(1, coords, self.weights.clone())
    }

    /// Coordinate-wise minimum and maximum.
    pub fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.dimension;
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for p in self.coords.chunks_exact(d) {
            for k in 0..d {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        lo.iter().zip(&hi).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt()
    }

    fn scaled(&self, c: f64) -> Self {
        PointCloud {
            dimension: self.dimension,
            coords: self.coords.iter().map(|x| x * c).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// Where the grid lines sit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridAnchor {
    /// Lines at integer multiples of ε.
    #[default]
    Origin,
    /// Lines at the cloud's coordinate-wise minimum plus multiples of ε.
    CloudMinimum,
}

struct Grid {
    anchor: Vec<f64>,
}

impl Grid {
    fn new(cloud: &PointCloud, anchor: GridAnchor) -> Self {
        let anchor = match anchor {
            GridAnchor::Origin => vec![0.0; cloud.dimension],
            GridAnchor::CloudMinimum => cloud.bounds().0,
        };
        Grid { anchor }
    }

    fn key(&self, p: &[f64], eps: f64) -> Result<u128> {
        let mut key = 0u128;
        for (x, a) in p.iter().zip(&self.anchor) {
            let t = (x - a) / eps;
            let t = (t + t.abs().max(1.0) * SNAP_ULPS * f64::EPSILON).floor();
            if t.abs() >= (1u64 << 31) as f64 {
                return Err(Error::Degenerate(format!("grid index {t} out of range at scale {eps:e}")));
            }
            key = (key << 32) | u128::from((t as i64 + (1i64 << 31)) as u32);
        }
        Ok(key)
    }

    /// Occupied cells at scale `eps` with their masses, sorted by key.
    fn cells(&self, cloud: &PointCloud, eps: f64) -> Result<Vec<(u128, f64)>> {
        let mut keyed =
            par::try_map_range(cloud.len(), |i| Ok::<_, Error>((self.key(cloud.point(i), eps)?, cloud.weight(i))))?;
        keyed.sort_by_key(|&(k, _)| k);
        let mut out: Vec<(u128, f64)> = Vec::new();
        for (k, w) in keyed {
            match out.last_mut() {
                Some((last, m)) if *last == k => *m += w,
                _ => out.push((k, w)),
            }
        }
        Ok(out)
    }
}

fn check_inputs(cloud: &PointCloud, ladder: &ScaleLadder) -> Result<bool> {
    if cloud.is_empty() {
        return Err(Error::param("cloud", "cloud is empty"));
    }
    let diam = cloud.diameter();
    if diam == 0.0 {
        return Ok(false);
    }
    let finest = *ladder.log_scales().last().expect("ladder is never empty");
    if finest.exp() >= diam {
        return Err(Error::Degenerate(format!(
            "degenerate window: finest scale {:e} is not below the cloud diameter {diam:e}",
            finest.exp()
        )));
    }
    Ok(true)
}

/// Box-counting dimension with the grid anchored at the origin.
pub fn box_dimension(cloud: &PointCloud, ladder: &ScaleLadder) -> Result<DimensionReport> {
    box_dimension_anchored(cloud, ladder, GridAnchor::Origin)
}

/// Regresses the log of the occupied-cell count on `ln(1/ε)`.
pub fn box_dimension_anchored(cloud: &PointCloud, ladder: &ScaleLadder, anchor: GridAnchor) -> Result<DimensionReport> {
    if !check_inputs(cloud, ladder)? {
        return Ok(DimensionReport::zero("box", ladder, vec![1.0; ladder.len()]));
    }
    let grid = Grid::new(cloud, anchor);
    let counts =
        ladder.scales().iter().map(|&e| grid.cells(cloud, e).map(|c| c.len() as f64)).collect::<Result<Vec<_>>>()?;
    let x = ladder.log_scales().iter().map(|l| -l).collect();
    let y = counts.iter().map(|c| c.ln()).collect();
    Ok(DimensionReport::fit("box", ladder, x, y, counts))
}

/// Information dimension with the grid anchored at the origin.
pub fn information_dimension(cloud: &PointCloud, ladder: &ScaleLadder) -> Result<DimensionReport> {
    information_dimension_anchored(cloud, ladder, GridAnchor::Origin)
}

/// Regresses the grid-partition entropy `H(ε)` (nats) on `ln(1/ε)`.
/// Clouds without weights carry the uniform empirical measure.
pub fn information_dimension_anchored(
    cloud: &PointCloud,
    ladder: &ScaleLadder,
    anchor: GridAnchor,
) -> Result<DimensionReport> {
    if !check_inputs(cloud, ladder)? {
        return Ok(DimensionReport::zero("information", ladder, vec![0.0; ladder.len()]));
    }
    let grid = Grid::new(cloud, anchor);
    let entropies = ladder
        .scales()
        .iter()
        .map(|&e| {
            grid.cells(cloud, e).map(|cells| cells.iter().filter(|c| c.1 > 0.0).map(|&(_, m)| -m * m.ln()).sum::<f64>())
        })
        .collect::<Result<Vec<_>>>()?;
    let x = ladder.log_scales().iter().map(|l| -l).collect();
    Ok(DimensionReport::fit("information", ladder, x, entropies.clone(), entropies))
}

/// Pointwise dimension at the listed reference points: each regresses minus
/// the log-mass of its own grid cell on `ln(1/ε)`. The report's slope is the
/// mean over references and `per_point` holds the individual slopes.
pub fn grid_pointwise_dimension(
    cloud: &PointCloud,
    ladder: &ScaleLadder,
    references: &[usize],
) -> Result<DimensionReport> {
    if references.is_empty() {
        return Err(Error::param("references", "need at least one reference point"));
    }
    if let Some(&r) = references.iter().find(|&&r| r >= cloud.len()) {
        return Err(Error::param("references", format!("index {r} outside a cloud of {} points", cloud.len())));
    }
    if !check_inputs(cloud, ladder)? {
        let mut r = DimensionReport::zero("pointwise", ladder, vec![1.0; ladder.len()]);
        r.per_point = Some(vec![0.0; references.len()]);
        return Ok(r);
    }
    let grid = Grid::new(cloud, GridAnchor::Origin);
    let mut masses = vec![Vec::with_capacity(ladder.len()); references.len()];
    for e in ladder.scales() {
        let cells = grid.cells(cloud, e)?;
        for (j, &r) in references.iter().enumerate() {
            let key = grid.key(cloud.point(r), e)?;
            let at = cells.binary_search_by_key(&key, |c| c.0).expect("reference point lies in an occupied cell");
            masses[j].push(cells[at].1);
        }
    }
    let x: Vec<f64> = ladder.log_scales().iter().map(|l| -l).collect();
    let reports: Vec<DimensionReport> = masses
        .into_iter()
        .map(|m| {
            let y = m.iter().map(|v| -v.ln()).collect();
            DimensionReport::fit("pointwise", ladder, x.clone(), y, m)
        })
        .collect();
    Ok(merge("pointwise", ladder, &reports))
}

/// Scales every coordinate by `c` (used by equivariance checks).
pub fn rescale(cloud: &PointCloud, c: f64) -> PointCloud {
    cloud.scaled(c)
}
