use serde::{Deserialize, Serialize};

use super::ladder::ScaleLadder;
use super::regress::{bracketed, interquartile_range};

/// Outcome of one dimension estimator.
///
/// `slope` estimates the dimension; `lower_slope`/`upper_slope` are the
/// finite-scale stand-ins for the lower and upper limits. When the report
/// aggregates many points, `per_point` holds each point's own slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub estimator: String,
    pub scales: Vec<f64>,
    pub counts_or_measures: Vec<f64>,
    pub slope: f64,
    pub lower_slope: f64,
    pub upper_slope: f64,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_point: Option<Vec<f64>>,
    /// Regression abscissae and ordinates (natural logs), kept for CSV export.
    #[serde(default, skip_serializing)]
    pub(crate) curve: Curve,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
pub(crate) struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl DimensionReport {
    /// Fits `y` against `x` over the ladder's window.
    ///
    /// `x` must grow as the scale shrinks (e.g. `ln(1/ε)`), and `raw` holds the
    /// untransformed counts or measures, one per ladder scale.
    pub(crate) fn fit(estimator: &str, ladder: &ScaleLadder, x: Vec<f64>, y: Vec<f64>, raw: Vec<f64>) -> Self {
        let w = ladder.fit_window();
        let b = bracketed(&x[w.clone()], &y[w]);
        DimensionReport {
            estimator: estimator.to_string(),
            scales: ladder.scales(),
            counts_or_measures: raw,
            slope: b.fit.slope,
            lower_slope: b.lower,
            upper_slope: b.upper,
            residual: b.fit.residual,
            per_point: None,
            curve: Curve { x, y },
        }
    }

    /// Degenerate estimate: slope 0 with no spread.
    pub(crate) fn zero(estimator: &str, ladder: &ScaleLadder, raw: Vec<f64>) -> Self {
        let n = ladder.len();
        DimensionReport {
            estimator: estimator.to_string(),
            scales: ladder.scales(),
            counts_or_measures: raw,
            slope: 0.0,
            lower_slope: 0.0,
            upper_slope: 0.0,
            residual: 0.0,
            per_point: None,
            curve: Curve { x: ladder.log_scales().iter().map(|l| -l).collect(), y: vec![0.0; n] },
        }
    }

    /// Interquartile range of `per_point`, or 0 when absent.
    pub fn per_point_spread(&self) -> f64 {
        self.per_point.as_deref().map(interquartile_range).unwrap_or(0.0)
    }

    /// Spread used by the exactness check: the larger of the secant bracket and
    /// the per-point dispersion.
    pub fn spread(&self) -> f64 {
        (self.upper_slope - self.lower_slope).max(self.per_point_spread())
    }

    /// One row per scale: `scale,raw_value,secant_slope` (secant between this
    /// scale and the previous one; empty on the first row).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,raw_value,secant_slope\n");
        for i in 0..self.scales.len() {
            let secant = if i == 0 || self.curve.x.len() != self.scales.len() {
                String::new()
            } else {
                let dx = self.curve.x[i] - self.curve.x[i - 1];
                format!("{}", (self.curve.y[i] - self.curve.y[i - 1]) / dx)
            };
            out.push_str(&format!("{:e},{:e},{}\n", self.scales[i], self.counts_or_measures[i], secant));
        }
        out
    }
}
